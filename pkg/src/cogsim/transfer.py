"""Transfer models: reasoner features + trial index -> baseline human response.

A calibrated RBF-kernel classifier predicts the True/False choice and the
probability of that choice (the evidence boundary R_p); an epsilon-insensitive
kernel regressor predicts the baseline response time R_t. The H reasoner
features are standardized on the training split; the trial index is appended
raw as one extra column.
"""

from __future__ import annotations

import pickle
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.calibration import CalibratedClassifierCV
from sklearn.svm import SVC, SVR

RT_MIN = 0.2
RT_MAX = 10.0

_MAGIC = b"CGTM"
_VERSION = 1


@dataclass(frozen=True)
class TransferInput:
    features: np.ndarray  # reasoner feature vector, length H
    question_id: int  # trial index, >= 1

    def row(self) -> np.ndarray:
        return np.concatenate([self.features, [float(self.question_id)]])


@dataclass(frozen=True)
class BaselinePrediction:
    choice: bool
    r_p: float  # probability of the predicted choice, in [0.5, 1]
    r_t: float  # baseline response time, clamped to [0.2, 10] s


@dataclass
class ChoiceModel:
    clf: CalibratedClassifierCV
    mean: np.ndarray
    std: np.ndarray


@dataclass
class RtModel:
    reg: SVR
    mean: np.ndarray
    std: np.ndarray


def _design_matrix(inputs: list[TransferInput]) -> np.ndarray:
    x = np.stack([inp.row() for inp in inputs])
    if not np.isfinite(x).all():
        raise ValueError("non-finite feature values")
    return x


def _standardize_fit(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Only the H reasoner features are standardized; the trailing trial index
    # passes through raw.
    mean = x[:, :-1].mean(axis=0)
    std = x[:, :-1].std(axis=0)
    std[std == 0] = 1.0
    return mean, std


def _standardize_apply(x: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    out = x.copy()
    out[:, :-1] = (out[:, :-1] - mean) / std
    return out


def fit_classifier(rows: list[tuple[TransferInput, bool]], seed: int = 0) -> ChoiceModel:
    """RBF soft-margin classifier with 3-fold out-of-fold sigmoid calibration."""
    if len(rows) < 2:
        raise ValueError("need at least 2 rows")
    y = np.array([bool(c) for _, c in rows])
    if y.all() or not y.any():
        raise ValueError("both classes must be present")
    x = _design_matrix([inp for inp, _ in rows])
    mean, std = _standardize_fit(x)
    clf = CalibratedClassifierCV(
        SVC(C=1.0, kernel="rbf", gamma="scale", random_state=seed), method="sigmoid", cv=3
    )
    clf.fit(_standardize_apply(x, mean, std), y)
    return ChoiceModel(clf=clf, mean=mean, std=std)


def fit_regressor(rows: list[tuple[TransferInput, float]]) -> RtModel:
    """Epsilon-insensitive RBF regressor for baseline response time."""
    if len(rows) < 2:
        raise ValueError("need at least 2 rows")
    rt = np.array([t for _, t in rows], dtype=float)
    if not ((rt > 0) & (rt <= RT_MAX)).all():
        raise ValueError("rt targets must lie in (0, 10]")
    x = _design_matrix([inp for inp, _ in rows])
    mean, std = _standardize_fit(x)
    reg = SVR(C=1.0, kernel="rbf", gamma="scale")
    reg.fit(_standardize_apply(x, mean, std), rt)
    return RtModel(reg=reg, mean=mean, std=std)


def predict_choice(model: ChoiceModel, inputs: list[TransferInput]) -> tuple[np.ndarray, np.ndarray]:
    """Predicted choices and calibrated probabilities of those choices."""
    x = _standardize_apply(_design_matrix(inputs), model.mean, model.std)
    probs = model.clf.predict_proba(x)
    top = probs.argmax(axis=1)
    choices = model.clf.classes_[top].astype(bool)
    return choices, probs[np.arange(len(inputs)), top]


def predict_rt(model: RtModel, inputs: list[TransferInput]) -> np.ndarray:
    x = _standardize_apply(_design_matrix(inputs), model.mean, model.std)
    return np.clip(model.reg.predict(x), RT_MIN, RT_MAX)


def predict_baseline(
    choice_model: ChoiceModel, rt_model: RtModel, inp: TransferInput
) -> BaselinePrediction:
    choices, r_p = predict_choice(choice_model, [inp])
    r_t = predict_rt(rt_model, [inp])
    return BaselinePrediction(choice=bool(choices[0]), r_p=float(r_p[0]), r_t=float(r_t[0]))


def save_models(path: str | Path, choice_model: ChoiceModel, rt_model: RtModel) -> None:
    """Versioned binary container; payload is a library-native pickle."""
    payload = pickle.dumps({"choice": choice_model, "rt": rt_model})
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(payload)))
        fh.write(payload)


def load_models(path: str | Path) -> tuple[ChoiceModel, RtModel]:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"not a transfer-model file: {path}")
        version, n = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ValueError(f"unsupported transfer-model version {version}")
        d = pickle.loads(fh.read(n))
    return d["choice"], d["rt"]

"""One binary driving the full pipeline from a single YAML config.

Subcommands write versioned artifacts plus a manifest (inputs, seeds, config
hash, file hashes) into the output directory; downstream subcommands refuse
artifacts produced under a different config hash.

Exit codes: 0 success, 1 runtime failure, 2 configuration/dependency error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import controller as ctl
from . import data, evaluation, pipeline, ppo, reasoner, taskgen, transfer
from .config import ConfigError, PipelineConfig, load_config

log = logging.getLogger("cogsim")


class DependencyError(ConfigError):
    pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def _write_manifest(out_dir: Path, name: str, files: list[Path], cfg: PipelineConfig, inputs: list[str]) -> None:
    manifest = {
        "artifact": name,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "inputs": inputs,
        "files": {f.name: _sha256(f) for f in files},
    }
    with open(out_dir / f"{name}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _require(out_dir: Path, name: str, cfg: PipelineConfig, hint: str) -> None:
    manifest_path = out_dir / f"{name}.manifest.json"
    if not manifest_path.exists():
        raise DependencyError(f"missing artifact {name!r} in {out_dir}; run `{hint}` first")
    manifest = json.loads(manifest_path.read_text())
    if manifest["config_hash"] != cfg.hash():
        raise DependencyError(
            f"artifact {name!r} was built under config hash {manifest['config_hash']}, "
            f"current config hashes to {cfg.hash()}; rebuild with `{hint}`"
        )


def _load_records(cfg: PipelineConfig, out_dir: Path) -> list[data.TrialRecord]:
    path = Path(cfg.paths.dataset)
    if not path.is_absolute() and not path.exists() and (out_dir / path.name).exists():
        path = out_dir / path.name
    if not path.exists():
        raise DependencyError(f"dataset not found: {path}; run `synth-data` or point paths.dataset at a CSV")
    records, report = data.ingest(path)
    if report:
        raise DependencyError(f"dataset {path} failed validation ({len(report)} problems); first: {report[0]}")
    return records


def cmd_gen_questions(cfg: PipelineConfig, out_dir: Path, args) -> None:
    questions = taskgen.enumerate_all()
    path = out_dir / "questions.csv"
    taskgen.write_csv(questions, path)
    _write_manifest(out_dir, "questions", [path], cfg, inputs=[])
    log.info("wrote %d questions to %s", len(questions), path)


def cmd_train_reasoner(cfg: PipelineConfig, out_dir: Path, args) -> None:
    questions = taskgen.enumerate_all()
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(questions))
    n_train = round(len(questions) * 0.8)
    train_qs = [questions[i] for i in order[:n_train]]
    dataset = [(taskgen.encode(q), taskgen.answer(q)) for q in train_qs]
    model, curve = reasoner.train(
        dataset,
        epochs=cfg.reasoner.epochs,
        lr=cfg.reasoner.lr,
        batch=cfg.reasoner.batch,
        seed=cfg.seed,
        hidden_size=cfg.reasoner.hidden_size,
        target_accuracy=args.target_accuracy,
    )
    ckpt = out_dir / "reasoner.ckpt"
    curve_path = out_dir / "reasoner_curve.csv"
    model.save(ckpt)
    reasoner.write_curve_csv(curve, curve_path)
    test_qs = [questions[i] for i in order[n_train:]]
    x_test = np.stack([taskgen.encode(q) for q in test_qs])
    y_test = np.array([taskgen.answer(q) for q in test_qs])
    acc = float(np.mean(reasoner.predict_batch(model, x_test) == y_test))
    _write_manifest(out_dir, "reasoner", [ckpt, curve_path], cfg, inputs=["enumeration"])
    log.info("held-out accuracy %.4f over %d questions", acc, len(test_qs))
    print(f"test_accuracy={acc:.4f}")


def cmd_synth_data(cfg: PipelineConfig, out_dir: Path, args) -> None:
    profile = data.SynthProfile(pressure_weight=args.pressure_weight)
    records = data.synth_dataset(args.participants, args.trials, cfg.seed, profile)
    path = out_dir / "trials.csv"
    data.write_csv(records, path)
    data.write_synth_manifest(out_dir / "trials_params.json", profile, cfg.seed, args.trials)
    _write_manifest(out_dir, "trials", [path], cfg, inputs=[])
    log.info("wrote %d synthetic trials to %s", len(records), path)


def cmd_fit_transfer(cfg: PipelineConfig, out_dir: Path, args) -> None:
    _require(out_dir, "reasoner", cfg, "train-reasoner")
    model = reasoner.ReasonerModel.load(out_dir / "reasoner.ckpt")
    records = _load_records(cfg, out_dir)
    folds = evaluation.split(records, evaluation.SplitSpec("general", seed=cfg.seed))
    train_records, test_records = folds[0]
    choice_model, rt_model = pipeline.fit_transfer(model, train_records, seed=cfg.seed)
    path = out_dir / "transfer.bin"
    transfer.save_models(path, choice_model, rt_model)
    _write_manifest(out_dir, "transfer", [path], cfg, inputs=["reasoner", "trials"])
    baselines = pipeline.baseline_predictions(model, choice_model, rt_model, test_records)
    m = evaluation.mape([b.r_t for b in baselines], [r.rt_seconds for r in test_records])
    acc = float(np.mean([b.choice == r.human_choice for b, r in zip(baselines, test_records)]))
    log.info("transfer test: choice accuracy %.4f, rt MAPE %.4f", acc, m)
    print(f"choice_accuracy={acc:.4f} rt_mape={m:.4f}")


def _agent_setup(cfg: PipelineConfig, out_dir: Path):
    _require(out_dir, "reasoner", cfg, "train-reasoner")
    _require(out_dir, "transfer", cfg, "fit-transfer")
    model = reasoner.ReasonerModel.load(out_dir / "reasoner.ckpt")
    choice_model, rt_model = transfer.load_models(out_dir / "transfer.bin")
    records = _load_records(cfg, out_dir)
    folds = evaluation.split(records, evaluation.SplitSpec("general", seed=cfg.seed))
    return model, choice_model, rt_model, folds[0]


def _ppo_config(cfg: PipelineConfig) -> ppo.PPOConfig:
    return ppo.PPOConfig(
        gamma=cfg.ppo.gamma,
        gae_lambda=cfg.ppo.gae_lambda,
        clip=cfg.ppo.clip,
        lr=cfg.ppo.lr,
        update_epochs=cfg.ppo.update_epochs,
        minibatch=cfg.ppo.minibatch,
        rollout_steps=cfg.ppo.rollout_steps,
        ent_coef=cfg.ppo.ent_coef,
    )


def cmd_train_drl(cfg: PipelineConfig, out_dir: Path, args) -> None:
    model, choice_model, rt_model, (train_records, _) = _agent_setup(cfg, out_dir)
    baselines = pipeline.baseline_predictions(model, choice_model, rt_model, train_records)
    if args.agent == "hybrid":
        contexts = pipeline.make_contexts(
            train_records, baselines, lam=cfg.ddm.lam, f=cfg.ddm.f, steepness=cfg.ddm.steepness
        )
        provider = pipeline.HybridProvider(contexts, seed=cfg.seed)
        obs_dim = provider._env.observation_dim
    else:
        trials = pipeline.pure_trials(train_records, baselines)
        provider = pipeline.PureProvider(trials, seed=cfg.seed, feature_dim=cfg.ppo.pure_feature_dim)
        obs_dim = provider.observation_dim
    result = ppo.train(provider, obs_dim, args.total_steps or cfg.ppo.total_steps,
                       seed=cfg.seed, config=_ppo_config(cfg))
    ckpt = out_dir / f"{args.agent}_policy.ckpt"
    curve_path = out_dir / f"{args.agent}_curve.csv"
    result.policy.save(ckpt)
    ppo.write_curve_csv(result.curve, curve_path)
    _write_manifest(out_dir, f"{args.agent}_policy", [ckpt, curve_path], cfg,
                    inputs=["reasoner", "transfer", "trials"])
    log.info("%s agent trained in %.1f s", args.agent, result.wall_seconds)
    print(f"wall_seconds={result.wall_seconds:.2f}")


def cmd_simulate(cfg: PipelineConfig, out_dir: Path, args) -> None:
    model, choice_model, rt_model, (_, test_records) = _agent_setup(cfg, out_dir)
    _require(out_dir, "hybrid_policy", cfg, "train-drl --agent hybrid")
    policy = ppo.PolicyNetwork.load(out_dir / "hybrid_policy.ckpt")
    baselines = pipeline.baseline_predictions(model, choice_model, rt_model, test_records)
    contexts = pipeline.make_contexts(
        test_records, baselines, lam=cfg.ddm.lam, f=cfg.ddm.f, steepness=cfg.ddm.steepness
    )
    episodes = pipeline.simulate_hybrid(policy, contexts)
    path = out_dir / "episodes.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["trial_id", "steps_taken", "r_rl", "reward", "actions"])
        for ep in episodes:
            w.writerow(ep.csv_row())
    by_group: dict[str, list] = {}
    for rec, ep in zip(test_records, episodes):
        by_group.setdefault(rec.group, []).append(ep)
    stats = {g: asdict(evaluation.trajectory_stats(eps)) for g, eps in sorted(by_group.items())}
    evaluation.write_group_summary_json(stats, out_dir / "trajectory_stats.json")
    _write_manifest(out_dir, "episodes", [path, out_dir / "trajectory_stats.json"], cfg,
                    inputs=["reasoner", "transfer", "trials", "hybrid_policy"])
    log.info("simulated %d episodes", len(episodes))


def cmd_evaluate(cfg: PipelineConfig, out_dir: Path, args) -> None:
    _require(out_dir, "reasoner", cfg, "train-reasoner")
    _require(out_dir, "hybrid_policy", cfg, "train-drl --agent hybrid")
    model = reasoner.ReasonerModel.load(out_dir / "reasoner.ckpt")
    hybrid = ppo.PolicyNetwork.load(out_dir / "hybrid_policy.ckpt")
    pure = None
    if (out_dir / "pure_policy.manifest.json").exists():
        _require(out_dir, "pure_policy", cfg, "train-drl --agent pure")
        pure = ppo.PolicyNetwork.load(out_dir / "pure_policy.ckpt")
    records = _load_records(cfg, out_dir)
    folds = evaluation.split(records, evaluation.SplitSpec(args.strategy, seed=cfg.seed))
    rows = []
    chronological = []
    for fold_idx, (train_records, test_records) in enumerate(folds):
        choice_model, rt_model = pipeline.fit_transfer(model, train_records, seed=cfg.seed)
        baselines = pipeline.baseline_predictions(model, choice_model, rt_model, test_records)
        truth = [r.rt_seconds for r in test_records]
        svm_pred = [b.r_t for b in baselines]
        contexts = pipeline.make_contexts(
            test_records, baselines, lam=cfg.ddm.lam, f=cfg.ddm.f, steepness=cfg.ddm.steepness
        )
        hybrid_pred = [ep.r_rl for ep in pipeline.simulate_hybrid(hybrid, contexts)]
        pure_pred = None
        if pure is not None:
            pure_pred = pipeline.simulate_pure(
                pure, pipeline.pure_trials(test_records, baselines), cfg.ppo.pure_feature_dim
            )
        participants = sorted({r.participant_id for r in test_records})
        label = participants[0] if args.strategy == "lopo" else "all"
        entry = {
            "fold": fold_idx,
            "participant": label,
            "group": test_records[0].group if args.strategy == "lopo" else "all",
            "svm_mape": evaluation.mape(svm_pred, truth),
            "hybrid_mape": evaluation.mape(hybrid_pred, truth),
            "pure_mape": evaluation.mape(pure_pred, truth) if pure_pred else "",
        }
        rows.append(entry)
        for r, pred in zip(test_records, hybrid_pred):
            chronological.append((r.participant_id, r.trial_index, pred, r.rt_seconds))
    path = out_dir / f"eval_{args.strategy}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)
    evaluation.write_chronological_csv(chronological, out_dir / f"eval_{args.strategy}_chronological.csv")
    _write_manifest(out_dir, f"eval_{args.strategy}",
                    [path, out_dir / f"eval_{args.strategy}_chronological.csv"], cfg,
                    inputs=["reasoner", "trials", "hybrid_policy"])
    for row in rows:
        print(json.dumps(row))


def cmd_serve(cfg: PipelineConfig, out_dir: Path, args) -> None:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(out_dir / "sessions"), host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cogsim", description=__doc__)
    parser.add_argument("--config", type=Path, default=None, help="YAML config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out-dir", type=Path, default=Path("outputs"))
    parser.add_argument("--json", action="store_true", help="machine-readable log lines")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-questions")
    p = sub.add_parser("train-reasoner")
    p.add_argument("--target-accuracy", type=float, default=None,
                   help="stop early once training accuracy reaches this")
    p = sub.add_parser("synth-data")
    p.add_argument("--participants", type=int, default=5, help="per group")
    p.add_argument("--trials", type=int, default=300, help="per participant")
    p.add_argument("--pressure-weight", type=float, default=-0.5)
    sub.add_parser("fit-transfer")
    p = sub.add_parser("train-drl")
    p.add_argument("--agent", choices=["hybrid", "pure"], required=True)
    p.add_argument("--total-steps", type=int, default=None)
    sub.add_parser("simulate")
    p = sub.add_parser("evaluate")
    p.add_argument("--strategy", choices=list(evaluation.STRATEGIES), required=True)
    p = sub.add_parser("serve")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


COMMANDS = {
    "gen-questions": cmd_gen_questions,
    "train-reasoner": cmd_train_reasoner,
    "synth-data": cmd_synth_data,
    "fit-transfer": cmd_fit_transfer,
    "train-drl": cmd_train_drl,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO,
        format='{"level": "%(levelname)s", "msg": "%(message)s"}' if args.json else "%(levelname)s %(message)s",
    )
    try:
        overrides = {} if args.seed is None else {"seed": args.seed}
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        COMMANDS[args.command](cfg, out_dir, args)
    except DependencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.exception("command failed: %s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

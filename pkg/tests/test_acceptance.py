"""Acceptance suite: one test per release criterion, one printed verdict each.

Run with ``pytest tests/test_acceptance.py -v -s``. The heavy fixtures
(full-size reasoner, synthetic study, trained agents) are session-scoped and
shared across criteria; the whole suite targets a desk CPU budget of well
under an hour.
"""

import time

import numpy as np
import pytest

from cogsim import (
    controller as ctl,
    data,
    ddm,
    envs,
    evaluation,
    pipeline,
    ppo,
    reasoner,
    taskgen,
    transfer,
)


def verdict(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# -- shared heavy fixtures ---------------------------------------------------


@pytest.fixture(scope="session")
def enumeration():
    return taskgen.enumerate_all()


@pytest.fixture(scope="session")
def reasoner_splits(enumeration):
    rng = np.random.default_rng(0)
    order = rng.permutation(len(enumeration))
    n_train = round(len(enumeration) * 0.8)
    train_qs = [enumeration[i] for i in order[:n_train]]
    test_qs = [enumeration[i] for i in order[n_train:]]
    return train_qs, test_qs


@pytest.fixture(scope="session")
def full_reasoner(reasoner_splits):
    """H=256 model trained on the 80% split, early-stopped on train accuracy."""
    train_qs, _ = reasoner_splits
    dataset = [(taskgen.encode(q), taskgen.answer(q)) for q in train_qs]
    t0 = time.monotonic()
    model, curve = reasoner.train(
        dataset, epochs=100, hidden_size=256, seed=0, target_accuracy=0.997
    )
    return model, curve, time.monotonic() - t0


@pytest.fixture(scope="session")
def study():
    """Synthetic oracle study: 4 groups x 5 participants x 300 trials."""
    records = data.synth_dataset(5, 300, seed=0, profile=data.SynthProfile())
    folds = evaluation.split(records, evaluation.SplitSpec("general", seed=0))
    return folds[0]


@pytest.fixture(scope="session")
def transfer_models(full_reasoner, study):
    model, _, _ = full_reasoner
    train_records, test_records = study
    choice_model, rt_model = pipeline.fit_transfer(model, train_records, seed=0)
    baselines_train = pipeline.baseline_predictions(model, choice_model, rt_model, train_records)
    baselines_test = pipeline.baseline_predictions(model, choice_model, rt_model, test_records)
    return choice_model, rt_model, baselines_train, baselines_test


PPO_STEPS = 24576
PPO_CONFIG = ppo.PPOConfig()


@pytest.fixture(scope="session")
def hybrid_result(full_reasoner, study, transfer_models):
    model, _, _ = full_reasoner
    train_records, _ = study
    _, _, baselines_train, _ = transfer_models
    contexts = pipeline.make_contexts(train_records, baselines_train)
    provider = pipeline.HybridProvider(contexts, seed=0)
    return ppo.train(provider, provider._env.observation_dim, PPO_STEPS, seed=0, config=PPO_CONFIG)


@pytest.fixture(scope="session")
def pure_result(study, transfer_models):
    train_records, _ = study
    _, _, baselines_train, _ = transfer_models
    trials = pipeline.pure_trials(train_records, baselines_train)
    provider = pipeline.PureProvider(trials, seed=0, feature_dim=128)
    return ppo.train(provider, provider.observation_dim, PPO_STEPS, seed=0, config=PPO_CONFIG)


# -- criteria ----------------------------------------------------------------


def test_enumeration_count_and_oracle(enumeration):
    t0 = time.monotonic()
    ok_count = len(enumeration) == 20412
    ok_ranges = all(taskgen.satisfies_generation_constraints(q) for q in enumeration)
    ok_unique = len(set(enumeration)) == len(enumeration)
    # independent oracle: plain integer arithmetic on the rendered string
    ok_answers = True
    for q in enumeration:
        s = q.render()
        num1, num2, num3 = int(s[:2]), int(s[3:5]), int(s[9])
        r = (num1 - num2) % num3
        if r < 0:
            r += num3
        if taskgen.answer(q) != r:
            ok_answers = False
            break
    dt = time.monotonic() - t0
    verdict(
        "enumeration",
        ok_count and ok_ranges and ok_unique and ok_answers and dt < 1.0,
        f"{len(enumeration)} questions, ranges={ok_ranges}, unique={ok_unique}, "
        f"oracle={ok_answers}, {dt:.2f}s (20414 in the source report; "
        f"the constraint set yields 20412, see notes)",
    )


def test_reasoner_heldout_accuracy(full_reasoner, reasoner_splits):
    model, curve, wall = full_reasoner
    _, test_qs = reasoner_splits
    x = np.stack([taskgen.encode(q) for q in test_qs])
    y = np.array([taskgen.answer(q) for q in test_qs])
    acc = float(np.mean(reasoner.predict_batch(model, x) == y))
    epochs = len(curve)
    verdict(
        "reasoner-accuracy",
        acc >= 0.99 and epochs <= 100,
        f"held-out accuracy {acc:.4f} after {epochs} epochs ({wall / 60:.1f} min)",
    )


def test_reasoner_capacity_ordering():
    # larger hidden sizes reach lower training loss in the same epoch budget
    subset = [(taskgen.encode(q), taskgen.answer(q)) for q in taskgen.enumerate_all()[::8]]
    losses = {}
    for h in (32, 64, 128):
        _, curve = reasoner.train(subset, epochs=4, hidden_size=h, seed=0)
        losses[h] = curve[-1][1]
    ordered = losses[128] < losses[64] < losses[32]
    verdict(
        "reasoner-capacity-ordering",
        ordered,
        "loss after 4 epochs: " + ", ".join(f"H={h}: {v:.4f}" for h, v in losses.items()),
    )


def test_gradient_checks():
    t0 = time.monotonic()
    # recurrent net
    model = reasoner.ReasonerModel.init(4, seed=0)
    rng = np.random.default_rng(1)
    qs = [taskgen.random_question(rng) for _ in range(3)]
    x = np.stack([taskgen.encode(q) for q in qs])
    y = np.array([taskgen.answer(q) for q in qs])
    _, _, analytic = reasoner.loss_and_grads(model, x, y)
    worst_r = 0.0
    eps = 1e-5
    for name, p in model.params.items():
        flat = p.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            lp, _, _ = reasoner.loss_and_grads(model, x, y)
            flat[j] = orig - eps
            lm, _, _ = reasoner.loss_and_grads(model, x, y)
            flat[j] = orig
            num = (lp - lm) / (2 * eps)
            denom = max(abs(num), abs(analytic[name].reshape(-1)[j]), 1e-6)
            worst_r = max(worst_r, abs(analytic[name].reshape(-1)[j] - num) / denom)
    # actor-critic
    policy = ppo.PolicyNetwork.init(4, seed=1)
    obs = rng.standard_normal((16, 4))
    actions = rng.standard_normal(16)
    logp_old = rng.standard_normal(16) - 1.5
    adv = rng.standard_normal(16)
    rets = rng.standard_normal(16)
    cfg = ppo.PPOConfig(ent_coef=0.01)
    _, g = ppo.loss_and_grads(policy, obs, actions, logp_old, adv, rets, cfg)
    worst_p = 0.0
    eps = 1e-6
    for name, p in policy.params.items():
        flat = p.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            sp, _ = ppo.loss_and_grads(policy, obs, actions, logp_old, adv, rets, cfg)
            flat[j] = orig - eps
            sm, _ = ppo.loss_and_grads(policy, obs, actions, logp_old, adv, rets, cfg)
            flat[j] = orig
            num = (sp["total"] - sm["total"]) / (2 * eps)
            denom = max(abs(num), abs(g[name].reshape(-1)[j]), 1e-6)
            worst_p = max(worst_p, abs(g[name].reshape(-1)[j] - num) / denom)
    dt = time.monotonic() - t0
    verdict(
        "gradient-checks",
        worst_r < 1e-4 and worst_p < 1e-4 and dt < 10.0,
        f"max relative error: recurrent {worst_r:.2e}, actor-critic {worst_p:.2e}, {dt:.1f}s",
    )


def test_ddm_invariants():
    t0 = time.monotonic()
    rng = np.random.default_rng(0)
    ok = True
    for _ in range(1000):
        r_p = float(rng.uniform(0.51, 1.0))
        r_t = float(rng.uniform(0.2, 10.0))
        k = float(rng.uniform(1.0, 12.0))
        traj = ddm.build_trajectory(r_p, r_t, f=5, steepness=k)
        if traj.values[0] != 0.5 or traj.values[-1] != r_p:
            ok = False
            break
        if not (np.diff(traj.values) > 0).all():
            ok = False
            break
        if not np.isclose(traj.delta_p * 5 * r_t, r_p - 0.5, rtol=1e-12):
            ok = False
            break
    dt = time.monotonic() - t0
    verdict("ddm-invariants", ok and dt < 1.0, f"1000 random (R_p, R_t, k) draws, {dt:.2f}s")


def test_zero_action_recovery():
    t0 = time.monotonic()
    rng = np.random.default_rng(1)
    env = envs.HybridEnv()
    ok = True
    for _ in range(1000):
        r_p = float(rng.uniform(0.51, 1.0))
        r_t = float(rng.uniform(0.2, 9.9))
        baseline = transfer.BaselinePrediction(choice=True, r_p=r_p, r_t=r_t)
        traj = ddm.build_trajectory(r_p, r_t)
        trial = data.synth_generate([data.SynthProfile()], "none", 1, seed=0)[0]
        ctx = envs.EpisodeContext(trial=trial, baseline=baseline, trajectory=traj, r_u=1.0)
        env.reset(ctx)
        done = False
        while not done:
            _, _, done, info = env.step(0.0)
        if info["r_rl"] != traj.n_steps / 5:
            ok = False
            print("fail sample:", r_p, r_t, traj.n_steps, info["r_rl"])
            break
    dt = time.monotonic() - t0
    verdict("zero-action-recovery", ok and dt < 1.0, f"1000 random contexts, exact, {dt:.2f}s")


def test_reward_law():
    rng = np.random.default_rng(2)
    ok = True
    for _ in range(10_000):
        r_rl = float(rng.uniform(0.0, 12.0))
        r_u = float(rng.uniform(0.2, 10.0))
        r_svm = float(rng.uniform(0.2, 10.0))
        e_rl = abs(r_rl - r_u) / r_u
        e_svm = max(abs(r_svm - r_u) / r_u, envs.EPS_E_SVM)
        base = envs.reward_time_match(r_rl, r_u, r_svm, penalty=False)
        pen = envs.reward_time_match(r_rl, r_u, r_svm, penalty=True)
        if e_rl < e_svm:
            if not (0.0 < base <= 1.0 and np.isclose(base, (e_svm - e_rl) / e_svm)):
                ok = False
                break
        elif base != 0.0:
            ok = False
            break
        if pen != base - 1.0:
            ok = False
            break
    verdict("reward-law", ok, "10^4 random (R_rl, R_u, R_svm) triples")


def test_trajectory_analytics():
    baseline = transfer.BaselinePrediction(choice=True, r_p=0.9, r_t=2.0)
    traj = ddm.build_trajectory(0.9, 2.0)
    trial = data.synth_generate([data.SynthProfile()], "none", 1, seed=0)[0]
    ctx = envs.EpisodeContext(trial=trial, baseline=baseline, trajectory=traj, r_u=2.0)
    ok = True
    episodes = []
    for action in (0.25, -0.1, 0.0):
        env = envs.HybridEnv()
        env.reset(ctx)
        done = False
        while not done:
            _, reward, done, _ = env.step(action)
        ep = env.record(reward)
        episodes.append(ep)
        expected = traj.delta_p * np.cumsum([action] * ep.steps_taken)
        if not np.array_equal(ep.effect_trajectory, expected):
            ok = False
        if ep.steps_taken >= 2 and not np.isclose(
            evaluation.episode_slope(ep), action * traj.delta_p, rtol=1e-12
        ):
            ok = False
    stats = evaluation.trajectory_stats(episodes)
    mean_effects = [float(np.mean(ep.effect_trajectory)) for ep in episodes]
    all_actions = np.concatenate([ep.actions for ep in episodes])
    ok = ok and np.isclose(stats.mean_effect, np.mean(mean_effects), rtol=1e-12)
    ok = ok and np.isclose(stats.action_std, all_actions.std(), rtol=1e-12)
    slopes = [evaluation.episode_slope(ep) for ep in episodes]
    ok = ok and np.isclose(stats.mean_slope, np.mean(slopes), rtol=1e-12)
    verdict(
        "trajectory-analytics",
        ok,
        "effect = delta_p * cumsum(actions) exact; constant-action slope exact; "
        "3-episode stats match hand computation",
    )


def test_controller_replay():
    from cogsim.service import replay_rule_pressure

    rng = np.random.default_rng(3)
    log = [(float(rng.uniform(0.5, 9.5)), bool(rng.random() < 0.8)) for _ in range(300)]
    identical = replay_rule_pressure(log) == replay_rule_pressure(log)
    ok_props = True
    for _ in range(10_000):
        n = int(rng.integers(1, 40))
        responses = [(float(rng.uniform(0.5, 9.5)), bool(rng.random() < 0.7)) for _ in range(n)]
        th = ctl.Thresholds(
            rt=float(rng.uniform(1.0, 6.0)),
            delta_rt=float(rng.uniform(-0.5, 0.5)),
            accu=float(rng.uniform(0.5, 1.0)),
            pc=int(rng.integers(1, 6)),
            tc=int(rng.integers(1, 4)),
        )
        out = replay_rule_pressure(responses, th)
        if sum(out) > th.pc:  # push counter caps deliveries
            ok_props = False
            break
        # hand-stepped replica: delivery must bump the push counter and reset
        # tolerance; the replayed sequence must match decision for decision
        state = ctl.ControllerState(thresholds=th)
        for (rt, correct), delivered in zip(responses, out):
            push_before = state.push_counter
            tolerant_before = state.tolerant_counter
            decided = bool(state.buffer) and ctl.decide(state)
            if decided != delivered:
                ok_props = False
                break
            if delivered:
                if not (
                    state.push_counter == push_before + 1
                    and state.tolerant_counter == 0
                    and tolerant_before >= th.tc - 1
                    and push_before < th.pc
                ):
                    ok_props = False
                    break
            elif state.push_counter != push_before:
                ok_props = False
                break
            ctl.observe(state, rt, correct)
        if not ok_props:
            break
    verdict(
        "controller-replay",
        identical and ok_props,
        "300-response replay bit-identical; PC/TC properties over 10^4 random logs",
    )


def test_dataset_reproduction_conditional(tmp_path):
    # No public behavioral dataset ships with (or is fetchable from) this
    # environment, so this criterion reduces to: the ingestion mapping shim
    # accepts a foreign column layout and validates it.
    foreign = tmp_path / "foreign.csv"
    foreign.write_text(
        "subj,cond,session,idx,n1,n2,n3,press,resp,acc,rt,att,anx\n"
        "s1,static,1,1,61,26,4,1,1,0,2.31,,\n"
        "s1,static,1,2,45,23,5,1,0,1,1.98,5,3\n"
    )
    column_map = {
        "subj": "participant_id", "cond": "group", "session": "day", "idx": "trial_index",
        "n1": "num1", "n2": "num2", "n3": "num3", "press": "pressure_shown",
        "resp": "human_choice", "acc": "correct", "rt": "rt_seconds",
        "att": "attention", "anx": "anxiety",
    }
    records, report = data.ingest(foreign, column_map=column_map)
    verdict(
        "dataset-reproduction (conditional)",
        len(records) == 2 and report == [],
        "public dataset unavailable here; downgraded per criterion to mapping-shim "
        f"check: {len(records)} foreign rows ingested with {len(report)} problems",
    )

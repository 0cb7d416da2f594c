"""Experiment runners behind the CLI.

Each runner executes one experiment kind, writes its CSV/SVG artifacts
into the output directory, and returns the verdicts for the assertions it
covers.  Randomness is drawn exclusively from the configured seed, so a
rerun with the same configuration reproduces every CSV byte-for-byte.
"""

import time
from pathlib import Path

import numpy as np

from .. import __version__
from ..closedform import (
    GradNormHistory,
    bn_rmsprop_map,
    g_schedule,
    r2_schedule,
    steady_angular_speed,
    steady_radius,
)
from ..continuous import eom_bregman, eom_bregman_euclidean, eom_modified, integrate_rk4, rk4_solve
from ..discrete import OptimizerState, step_gd_momentum_wd, step_nesterov, step_rmsprop
from ..geometry import Euclidean, NegativeEntropy, QuadraticForm, natural_schedule, nesterov_schedule
from ..losses import Quadratic, RadialWell, RayleighQuotient, TwoLayerChain
from ..symmetry import Rescale, Rotation, Scale, Translation, noether_residual, table2_report
from .config import ExperimentConfig, UsageError
from .report import Verdict, compare_channels, write_csv, write_manifest, write_svg, write_table_csv, write_verdicts


def _skew(dim: int, rng) -> np.ndarray:
    a = rng.standard_normal((dim, dim))
    return a - a.T


def transient_end(beta: float, k: float, total_time: float) -> float:
    """Start of the comparison window: five kernel time constants, capped
    at a fifth of the run."""
    if k <= 0:
        return 0.2 * total_time
    return min(5.0 * (1.0 - beta) / (4.0 * k), 0.2 * total_time)


# ---------------------------------------------------------------------------
# table2

def run_table2(cfg: ExperimentConfig, out: Path):
    dim = cfg["dim"]
    rng = np.random.default_rng(cfg.seed)
    metrics = [Euclidean(dim), NegativeEntropy(dim)]
    transforms = [Translation(np.eye(dim)[0]), Rotation(_skew(dim, rng)),
                  Scale(), Rescale(dim // 2)]
    rows = table2_report(metrics, transforms, samples=cfg["samples"], seed=cfg.seed)

    header = ["metric"] + [tf.name for tf in transforms]
    write_table_csv(out / "table2.csv", header,
                    [[row[0].metric] + [c.label for c in row] for row in rows])
    write_table_csv(out / "table2_magnitudes.csv", header,
                    [[row[0].metric] + [c.max_abs for c in row] for row in rows])

    expected = [["symmetric", "symmetric", "asymmetric", "asymmetric"],
                ["asymmetric"] * 4]
    labels = [[c.label for c in row] for row in rows]
    verdicts = [Verdict("table2.pattern", labels == expected,
                        float(labels == expected), 1.0)]
    asym_floor = min(c.max_abs for row in rows for c in row if c.label == "asymmetric")
    verdicts.append(Verdict("table2.asymmetric-cells-macroscopic",
                            asym_floor >= 1e-3, asym_floor, 1e-3))
    sym_ceiling = max((c.max_abs for row in rows for c in row if c.label == "symmetric"),
                      default=0.0)
    verdicts.append(Verdict("table2.symmetric-cells-null", sym_ceiling <= 1e-8,
                            sym_ceiling, 1e-8))
    return verdicts


# ---------------------------------------------------------------------------
# noether-residual

def _residual_cases():
    """(metric, transform, invariant loss, q0, qdot0) for each combination of
    the three metric families with the four transform families."""
    nhat = np.ones(3) / np.sqrt(3)
    translation = (
        Translation(nhat),
        Quadratic(25.0 * (np.eye(3) - np.outer(nhat, nhat))),
        np.array([1.2, 0.9, 1.0]),
        np.array([0.1, -0.2, 0.15]),
    )
    rotation = (
        Rotation(np.array([[0.0, -1.0], [1.0, 0.0]])),
        RadialWell.harmonic(1.0, 25.0, 2),
        np.array([0.9, 0.6]),
        np.array([-0.12, 0.18]),
    )
    theta = np.pi / 6
    rot_m = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    scale = (
        Scale(),
        RayleighQuotient(rot_m @ np.diag([1.0, 21.0]) @ rot_m.T),
        np.array([1.034, 0.376]),
        np.array([0.1, 0.1]),
    )
    rescale = (
        Rescale(1),
        TwoLayerChain([5.0], [5.0]),
        np.array([1.4, 0.8]),
        np.array([0.1, -0.05]),
    )

    metrics3 = [Euclidean(3),
                QuadraticForm(np.array([[2.0, 0.3, 0.0], [0.3, 1.2, 0.1], [0.0, 0.1, 1.5]])),
                NegativeEntropy(3)]
    metrics2 = [Euclidean(2), QuadraticForm(np.array([[2.0, 0.3], [0.3, 1.2]])),
                NegativeEntropy(2)]
    cases = [(metric,) + translation for metric in metrics3]
    for tf_case in (rotation, scale, rescale):
        cases.extend((metric,) + tf_case for metric in metrics2)
    return cases


def run_noether_residual(cfg: ExperimentConfig, out: Path):
    dt = cfg["dt"]
    t1 = cfg["t1"]
    if t1 / dt < 4:
        raise UsageError("dt too coarse: the residual needs at least 5 samples")
    schedule = natural_schedule(cfg["m"], cfg["mu"])
    verdicts = []
    coarse_max = 0.0
    fine_max = 0.0
    series = []
    for metric, transform, loss, q0, qd0 in _residual_cases():
        tag = f"{metric.name}-{transform.name}"
        system = eom_bregman(metric, schedule, loss)
        traj = integrate_rk4(system, q0, qd0, 0.0, t1, dt)
        obs = noether_residual(metric, schedule, transform, traj)
        fine = integrate_rk4(system, q0, qd0, 0.0, t1, dt / 2.0)
        obs_fine = noether_residual(metric, schedule, transform, fine)

        worst = float(np.max(np.abs(obs.residual)))
        coarse_max = max(coarse_max, worst)
        fine_max = max(fine_max, float(np.max(np.abs(obs_fine.residual))))
        verdicts.append(Verdict(f"noether-residual.{tag}.max", worst <= 1e-4, worst, 1e-4))

        write_csv(out / f"residual_{tag}.csv", obs.times, {
            "charge": obs.charge,
            "charge_rate": obs.charge_rate,
            "dissipation": obs.dissipation,
            "dynamic_asymmetry": obs.dynamic_asymmetry,
            "noneuclid_term": obs.noneuclid_term,
            "residual": obs.residual,
        })
        series.append((tag, obs.times, np.log10(np.abs(obs.residual) + 1e-18)))

    ratio = coarse_max / fine_max if fine_max > 0 else np.inf
    verdicts.append(Verdict("noether-residual.halving-ratio", ratio >= 8.0, ratio, 8.0))
    write_svg(out / "noether_residual.svg",
              "charge balance residual (log10) per metric x transform",
              series, ylabel="log10 |residual|")
    return verdicts


# ---------------------------------------------------------------------------
# conservation

def run_conservation(cfg: ExperimentConfig, out: Path):
    eta = cfg["eta"]
    steps = cfg["steps"]
    dim = cfg["dim"]
    ray = RayleighQuotient(np.diag(np.linspace(1.0, 2.0, dim)))
    q0 = np.full(dim, 0.5)

    def gd_norms(loss, q_init, lr, n):
        state = OptimizerState.initial(q_init)
        series = np.empty(n + 1)
        series[0] = state.q @ state.q
        for i in range(n):
            state = step_gd_momentum_wd(state, loss, lr)
            series[i + 1] = state.q @ state.q
        return state, series

    _, norms = gd_norms(ray, q0, eta, steps)
    times = eta * np.arange(steps + 1)
    drift = abs(norms[-1] - norms[0]) / norms[0]
    verdicts = [Verdict("conservation.rayleigh-norm-drift", drift <= 1e-3, drift, 1e-3)]
    write_csv(out / "conservation_norm.csv", times, {"norm_sq": norms})

    chain = TwoLayerChain([1.0], [1.0])
    state = OptimizerState.initial([1.5, 0.5])
    balance = np.empty(steps + 1)
    balance[0] = state.q[0] ** 2 - state.q[1] ** 2
    for i in range(steps):
        state = step_gd_momentum_wd(state, chain, eta)
        balance[i + 1] = state.q[0] ** 2 - state.q[1] ** 2
    bal_drift = abs(balance[-1] - balance[0]) / abs(balance[0])
    verdicts.append(Verdict("conservation.rescale-balance-drift",
                            bal_drift <= 1e-3, bal_drift, 1e-3))
    write_csv(out / "conservation_balance.csv", times, {"balance": balance})

    # symmetry breaking per unit time grows linearly with the step size
    etas = [eta, 10.0 * eta, 100.0 * eta]
    total_time = steps * eta
    drifts = []
    for lr in etas:
        _, series = gd_norms(ray, q0, lr, int(round(total_time / lr)))
        drifts.append(abs(series[-1] - series[0]) / series[0])
    slope = float(np.polyfit(np.log(etas), np.log(drifts), 1)[0])
    verdicts.append(Verdict("conservation.drift-slope", abs(slope - 1.0) <= 0.2,
                            slope, 0.2))
    write_table_csv(out / "conservation_sweep.csv", ["eta", "norm_drift"],
                    [[format(lr, ".17g"), d] for lr, d in zip(etas, drifts)])
    write_svg(out / "conservation.svg", "squared-norm drift under plain descent",
              [("norm_sq", times, norms),
               ("initial", times, np.full_like(times, norms[0]))],
              ylabel="|q|^2")
    return verdicts


# ---------------------------------------------------------------------------
# modified-eq (finite-step model vs gradient flow, plus accelerated gradient)

def run_modified_eq(cfg: ExperimentConfig, out: Path):
    eta = cfg["eta"]
    beta = cfg["beta"]
    t1 = cfg["t1"]
    loss = Quadratic(np.eye(1))

    steps = int(round(t1 / eta))
    if steps < 3:
        raise UsageError("t1/eta must allow at least 3 steps for the anchored comparison")
    state = OptimizerState.initial([1.0])
    qs = np.empty(steps + 1)
    qs[0] = 1.0
    for i in range(steps):
        state = step_gd_momentum_wd(state, loss, eta, beta=beta)
        qs[i + 1] = state.q[0]
    times = eta * np.arange(steps + 1)

    # anchor both continuous models at the first interior sample, with the
    # centered-difference velocity export for the second-order model
    q1 = qs[1]
    v1 = (qs[2] - qs[0]) / (2.0 * eta)
    t_end = steps * eta  # last discrete sample; t1 need not be a multiple
    refine = 100
    ode = integrate_rk4(eom_modified(eta, beta, 0.0, loss), [q1], [v1],
                        eta, t_end, eta / refine)
    ode_at = ode.q[::refine, 0]
    _, flow = rk4_solve(lambda t, y: -loss.grad(y) / (1.0 - beta),
                        np.array([q1]), eta, t_end, eta / refine)
    flow_at = flow[::refine, 0]

    ode_dev = float(np.max(np.abs(ode_at - qs[1:])))
    flow_dev = float(np.max(np.abs(flow_at - qs[1:])))
    ratio = flow_dev / ode_dev
    verdicts = [Verdict("modified-eq.flow-deviation-ratio", ratio >= 5.0, ratio, 5.0)]

    write_csv(out / "modified_eq.csv", times[1:], {
        "discrete": qs[1:], "modified_ode": ode_at, "gradient_flow": flow_at,
    })
    write_svg(out / "modified_eq.svg",
              "heavy-ball iterates vs continuous models",
              [("discrete", times[1:], qs[1:]),
               ("modified ODE", times[1:], ode_at),
               ("gradient flow", times[1:], flow_at)], ylabel="q")

    # accelerated gradient vs its singular-damping model (one step == sqrt(eta))
    eta_n = 1e-4
    s = np.sqrt(eta_n)
    n_steps = int(round(1.0 / s))
    state = OptimizerState.initial([1.0])
    xs = np.empty(n_steps + 1)
    xs[0] = 1.0
    for i in range(n_steps):
        state = step_nesterov(state, loss, eta_n)
        xs[i + 1] = state.q[0]
    k0 = int(round(0.2 / s))
    v0 = (xs[k0 + 1] - xs[k0 - 1]) / (2.0 * s)
    system = eom_bregman_euclidean(nesterov_schedule(2.0, 0.25), loss)
    traj = integrate_rk4(system, [xs[k0]], [v0], k0 * s, 1.0, s / 10)
    ode_f = np.array([loss.value([q]) for q in traj.q[::10, 0]])
    disc_f = np.array([loss.value([x]) for x in xs[k0:]])
    rel_err = abs(disc_f[-1] - ode_f[-1]) / abs(ode_f[-1])
    verdicts.append(Verdict("modified-eq.nesterov-f-error", rel_err <= 1e-2,
                            rel_err, 1e-2))
    nt = s * np.arange(k0, n_steps + 1)
    write_csv(out / "nesterov.csv", nt, {"f_discrete": disc_f, "f_ode": ode_f})
    write_svg(out / "nesterov.svg", "accelerated gradient: loss vs singular-damping model",
              [("discrete", nt, disc_f), ("ODE", nt, ode_f)], ylabel="f")
    return verdicts


# ---------------------------------------------------------------------------
# bn-effective-lr and steady-state share the flagship run

def flagship_run(cfg: ExperimentConfig):
    """Heavy-ball descent with weight decay on a scale-invariant objective,
    recording the norm, the unit-sphere gradient norm, and the per-step
    angular displacement."""
    eta = cfg["eta"]
    beta = cfg["beta"]
    k = cfg["wd"]
    steps = cfg["steps"]
    dim = cfg["dim"]
    # near-degenerate spectrum: slow angular decay keeps the radial balance
    # crossing broad enough to resolve
    lam = np.concatenate(([1.0], np.linspace(1.01, 1.02, dim - 1)))
    matrix = np.diag(lam)
    rng = np.random.default_rng(cfg.seed)
    tangent = rng.standard_normal(dim)
    tangent[0] = 0.0
    tangent /= np.linalg.norm(tangent)
    angle = np.deg2rad(60.0)
    q = np.cos(angle) * np.eye(dim)[0] + np.sin(angle) * tangent

    buffer = np.zeros(dim)
    norm_sq = np.empty(steps + 1)
    gsq = np.empty(steps + 1)
    ang = np.zeros(steps + 1)
    qhat_prev = q / np.linalg.norm(q)
    for n in range(steps + 1):
        rr = q @ q
        aq = matrix @ q
        f = (q @ aq) / rr
        g = 2.0 * (aq - f * q) / rr
        norm_sq[n] = rr
        gsq[n] = rr * (g @ g)  # |ghat|^2 = r^2 |grad f(q)|^2 by scale invariance
        if n < steps:
            buffer = beta * buffer - eta * (g + k * q)
            q = q + buffer
            qhat = q / np.sqrt(q @ q)
            ang[n + 1] = np.linalg.norm(qhat - qhat_prev)
            qhat_prev = qhat
    times = eta * np.arange(steps + 1)
    return times, norm_sq, gsq, ang


def run_bn_effective_lr(cfg: ExperimentConfig, out: Path):
    eta, beta, k = cfg["eta"], cfg["beta"], cfg["wd"]
    times, norm_sq, gsq, ang = flagship_run(cfg)
    history = GradNormHistory(times=times, gsq=gsq)
    predicted = r2_schedule(history, eta, beta, k, np.sqrt(norm_sq[0]))

    t_start = transient_end(beta, k, times[-1])
    result = compare_channels(times, norm_sq, times, predicted, 0.05,
                              mode="relative", window=(t_start, times[-1]))
    verdicts = [Verdict("bn-effective-lr.norm-matches-schedule", result.passed,
                        result.max_deviation, result.tolerance)]
    every = cfg["record_every"]
    rel = np.abs(norm_sq - predicted) / predicted
    write_csv(out / "bn_effective_lr.csv", times[::every], {
        "norm_sq": norm_sq[::every],
        "predicted_norm_sq": predicted[::every],
        "gsq_unit_sphere": gsq[::every],
        "relative_error": rel[::every],
    })
    write_svg(out / "bn_effective_lr.svg",
              "measured squared norm vs closed-form schedule",
              [("measured", times[::every], norm_sq[::every]),
               ("predicted", times[::every], predicted[::every])], ylabel="r^2")
    write_svg(out / "bn_effective_lr_error.svg",
              "relative error of the closed-form schedule",
              [("relative error", times[::every], rel[::every])], ylabel="rel err")
    return verdicts


def run_steady_state(cfg: ExperimentConfig, out: Path):
    """Measure the steady-state relations where the radial balance holds:
    at the crest of the norm trajectory, where rdot = 0."""
    eta, beta, k = cfg["eta"], cfg["beta"], cfg["wd"]
    times, norm_sq, gsq, ang = flagship_run(cfg)

    crest = int(np.argmax(norm_sq))
    t_c = times[crest]
    window = (times >= t_c - 2.0) & (times <= t_c + 2.0)
    ang_measured = float(np.mean(ang[1:][window[1:]]))
    ang_predicted = steady_angular_speed(eta, beta, k)
    ang_rel = abs(ang_measured - ang_predicted) / ang_predicted

    g_mean = float(np.mean(np.sqrt(gsq[window])))
    r_measured = float(np.mean(np.sqrt(norm_sq[window])))
    r_predicted = steady_radius(eta, beta, k, g_mean)
    r_rel = abs(r_measured - r_predicted) / r_predicted

    verdicts = [
        Verdict("steady-state.angular-displacement", ang_rel <= 0.10, ang_rel, 0.10),
        Verdict("steady-state.radius", r_rel <= 0.10, r_rel, 0.10),
    ]
    every = cfg["record_every"]
    write_csv(out / "steady_state.csv", times[::every], {
        "norm_sq": norm_sq[::every],
        "angular_displacement": ang[::every],
        "gnorm_unit_sphere": np.sqrt(gsq[::every]),
    })
    write_svg(out / "steady_state.svg",
              "per-step angular displacement vs steady-state prediction",
              [("measured", times[1::every], ang[1::every]),
               ("predicted", times[1::every],
                np.full(times[1::every].size, ang_predicted))],
              ylabel="|qhat step|")
    return verdicts


# ---------------------------------------------------------------------------
# rmsprop-equiv

def run_rmsprop_equiv(cfg: ExperimentConfig, out: Path):
    eta, rho, g0 = cfg["eta"], cfg["rho"], cfg["g0"]
    t1 = cfg["t1"]
    dim = cfg["dim"]
    rng = np.random.default_rng(cfg.seed)
    loss = Quadratic(np.diag(np.linspace(0.5, 2.0, dim)))
    state = OptimizerState.initial(2.0 * rng.standard_normal(dim), accumulator=g0)

    steps = int(round(t1 / eta))
    gsq = np.empty(steps + 1)
    memory = np.empty(steps + 1)
    for i in range(steps + 1):
        grad = loss.grad(state.q)
        gsq[i] = grad @ grad
        memory[i] = state.accumulator
        if i < steps:
            state = step_rmsprop(state, loss, eta, rho)
    times = eta * np.arange(steps + 1)
    history = GradNormHistory(times=times, gsq=gsq)
    predicted = g_schedule(history, eta, rho, g0)
    measured = np.sqrt(memory)
    result = compare_channels(times, measured, times, predicted, 0.02, mode="relative")
    verdicts = [Verdict("rmsprop-equiv.discrete-vs-schedule", result.passed,
                        result.max_deviation, result.tolerance)]
    write_csv(out / "rmsprop_schedule.csv", times, {
        "sqrt_G_discrete": measured, "sqrt_G_schedule": predicted, "gsq": gsq,
    })
    write_svg(out / "rmsprop_schedule.svg",
              "adaptive factor: recursion vs closed form",
              [("discrete", times, measured), ("closed form", times, predicted)],
              ylabel="sqrt(G)")

    # functional identity on a synthetic history with kernel-matched parameters
    beta_bn = 0.5
    eta_bn = 0.004
    k_bn = eta_bn * (1.0 + beta_bn) / (2.0 * (1.0 - beta_bn) ** 2)
    kernel = bn_rmsprop_map(eta_bn, beta_bn, k_bn)
    n = 5000
    grid = 0.01 * np.arange(n + 1)
    synthetic = GradNormHistory(times=grid,
                                gsq=1.0 + 0.5 * np.sin(0.7 * grid) + 0.2 * np.cos(2.3 * grid) ** 2)
    r0 = 2.0 ** 0.25
    norm_series = r2_schedule(synthetic, eta_bn, beta_bn, k_bn, r0)
    adaptive_series = g_schedule(synthetic, kernel.eta, kernel.rho, r0 ** 4)
    identity = compare_channels(grid, norm_series, grid, adaptive_series, 1e-10,
                                mode="relative")
    verdicts.append(Verdict("rmsprop-equiv.functional-identity", identity.passed,
                            identity.max_deviation, identity.tolerance))
    # recorded, not asserted: the residual prefactor ratio of the kernel map
    # at the flagship hyperparameters, where the constraints over-determine
    generic = bn_rmsprop_map(0.01, 0.9, 1e-4)
    verdicts.append(Verdict("rmsprop-equiv.prefactor-ratio", True,
                            generic.prefactor_ratio, np.inf))
    write_csv(out / "kernel_identity.csv", grid, {
        "norm_schedule": norm_series, "adaptive_schedule": adaptive_series,
    })
    write_svg(out / "kernel_identity.svg",
              "norm schedule vs adaptive schedule on one history",
              [("norm schedule", grid, norm_series),
               ("adaptive schedule", grid, adaptive_series)], ylabel="value")
    return verdicts


_RUNNERS = {
    "table2": run_table2,
    "noether-residual": run_noether_residual,
    "conservation": run_conservation,
    "modified-eq": run_modified_eq,
    "bn-effective-lr": run_bn_effective_lr,
    "steady-state": run_steady_state,
    "rmsprop-equiv": run_rmsprop_equiv,
}


def run_experiment(cfg: ExperimentConfig):
    """Execute one experiment: artifacts, manifest, verdict file.

    Returns the verdict list; all assertions passing means CLI exit 0.
    """
    runner = _RUNNERS.get(cfg.kind)
    if runner is None:
        raise UsageError(f"unknown experiment kind {cfg.kind!r}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    verdicts = runner(cfg, out)
    wall = time.perf_counter() - started
    write_manifest(out / "manifest.txt", cfg, wall, __version__)
    write_verdicts(out / "verdict.tsv", verdicts)
    return verdicts

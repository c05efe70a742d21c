"""The five comparative experiments, each emitting CSV artifacts plus a
sidecar JSON of the fully resolved configuration."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import MatrixStatsAccumulator, robust_median
from .batched import (
    det_jacobian_batch,
    dls_matrix_batch,
    fd_matrix_batch,
    inertia_batch,
    jacobian_batch,
)
from .chain import (
    KinematicChain,
    VirtualModelParams,
    build_virtual_chain,
    load_chain,
    ur10_chain,
)
from .kinematics import forward_kinematics
from .mappings import DivergenceError, MappingSpec, closed_loop_simulate
from .singularity import (
    PsoParams,
    SingularSet,
    collect_singular_set,
    load_singular_set,
    save_singular_set,
)

EXPERIMENTS = (
    "decoupling",
    "conditioning",
    "singular-pass",
    "global-singular",
    "timing",
    "closed-loop",
)

SINGULARITY_SENTINEL = 1e12  # exact-inverse spectral norms beyond this report "inf"
_CHUNK = 4096

DEFAULT_GAMMAS = tuple(np.logspace(0.0, 4.0, 17))
DEFAULT_ALPHAS = tuple(np.append(np.logspace(-3.0, 0.0, 13), 1.1))

# Joint-space waypoints of the shipped singular-pass trajectory.  The
# piecewise-linear path crosses a wrist singularity (q5 = 0) twice in quick
# succession, then an elbow singularity (q3 = 0), and ends in a fully
# stretched elbow configuration; the >= 4 crossing check validates this.
DEFAULT_WAYPOINTS = (
    (0.0, -1.2, 1.4, -0.5, 0.9, 0.3),
    (0.15, -1.1, 1.2, -0.4, -0.35, 0.2),
    (0.3, -1.0, 1.1, -0.3, 0.45, 0.1),
    (0.45, -1.25, -0.9, -0.2, 0.8, 0.0),
    (0.6, -math.pi / 2, 0.0, 0.0, 0.7, -0.1),
)

HOME_CONFIGURATION = (0.0, -1.2, 1.4, -0.5, 0.9, 0.3)


@dataclass
class ExperimentConfig:
    """Resolved configuration of one experiment run."""

    experiment: str
    seed: int = 0
    sample_count: Optional[int] = None  # experiment-specific default when None
    gamma_list: Sequence[float] = DEFAULT_GAMMAS
    alpha_list: Sequence[float] = DEFAULT_ALPHAS
    output_dir: str = "results"
    chain_source: str = "ur10"
    m_e: float = 1.0
    ip_e: float = 1.0
    # decoupling
    decoupling_gammas: Sequence[float] = (1.0, 1e3)
    # conditioning
    median_filtered: bool = True
    # singular pass
    waypoints: Sequence[Sequence[float]] = DEFAULT_WAYPOINTS
    pass_alpha: float = 0.1
    pass_gammas: Sequence[float] = (10.0, 100.0, 1000.0)
    # global singular / PSO
    pso: PsoParams = field(default_factory=PsoParams)
    dedup: bool = True
    dedup_min_dist: float = 1e-3
    # timing
    timing_warmup: int = 1000
    timing_alpha: float = 0.1
    timing_sdls_limit: float = math.pi / 4
    timing_gamma: float = 1e3
    # closed loop
    gain: float = 10.0
    dt: float = 1e-3
    loop_gamma: float = 1e3
    targets: int = 1
    stop_below: Optional[float] = None
    reset_rest: bool = True
    q0: Sequence[float] = HOME_CONFIGURATION
    min_target_manipulability: float = 0.02
    target_radius: Optional[float] = 0.6  # rad per joint; None samples the whole box

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}, expected one of {EXPERIMENTS}"
            )
        if self.sample_count is not None and self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")

    def samples(self) -> int:
        """Main sample count with the experiment-specific default."""
        if self.sample_count is not None:
            return self.sample_count
        return {
            "decoupling": 100_000,
            "conditioning": 1000,
            "singular-pass": 801,
            "global-singular": 1000,
            "timing": 100_000,
            "closed-loop": 20_000,
        }[self.experiment]

    def chain(self) -> KinematicChain:
        if self.chain_source == "ur10":
            return ur10_chain()
        return load_chain(self.chain_source)

    def resolved(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, PsoParams):
                value = value.to_dict()
            elif isinstance(value, tuple):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            out[f.name] = value
        out["resolved_sample_count"] = self.samples()
        out["library_version"] = __version__
        return out


def config_from_dict(experiment: str, data: dict) -> ExperimentConfig:
    """Build a config from JSON data; unknown keys are rejected."""
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(data)
    if "pso" in kwargs and isinstance(kwargs["pso"], dict):
        kwargs["pso"] = PsoParams.from_dict({**PsoParams().to_dict(), **kwargs["pso"]})
    kwargs.pop("experiment", None)
    return ExperimentConfig(experiment=experiment, **kwargs)


# --- CSV plumbing ------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf"
    return f"{value:.17g}"


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_config(out_dir: Path, cfg: ExperimentConfig, metadata: dict) -> None:
    payload = cfg.resolved()
    payload["metadata"] = metadata
    (out_dir / "config.json").write_text(json.dumps(payload, indent=2, default=float))


def _method_slug(spec: MappingSpec) -> str:
    if spec.method == "DLS":
        return f"DLS_a{spec.alpha:g}"
    if spec.method == "FD":
        return f"FD_g{spec.gamma:g}"
    if spec.method == "SDLS":
        return f"SDLS_l{spec.sdls_limit:g}"
    return spec.method


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _uniform_chunks(rng: np.random.Generator, total: int, dim: int):
    done = 0
    while done < total:
        take = min(_CHUNK, total - done)
        yield rng.uniform(-np.pi, np.pi, size=(take, dim))
        done += take


# --- decoupling (type (b) mean/std heatmaps) ---------------------------------


def run_decoupling(cfg: ExperimentConfig) -> list[Path]:
    """Entrywise mean/std of the type (b) matrices for JI, JT and FD over
    uniformly sampled configurations."""
    out = _out_dir(cfg)
    chain = cfg.chain()
    total = cfg.samples()
    rng = np.random.default_rng(cfg.seed)

    fd_specs = [MappingSpec.fd(g) for g in cfg.decoupling_gammas]
    fd_chains = [
        build_virtual_chain(chain, VirtualModelParams(g, cfg.m_e, cfg.ip_e))
        for g in cfg.decoupling_gammas
    ]
    specs = [MappingSpec.ji(), MappingSpec.jt(), *fd_specs]
    accumulators = {_method_slug(s): MatrixStatsAccumulator() for s in specs}
    skipped_ji = 0
    eye = np.eye(6)

    for qs in _uniform_chunks(rng, total, chain.n):
        jacs = jacobian_batch(chain, qs)
        sigmas = np.linalg.svd(jacs, compute_uv=False)
        regular = sigmas[:, -1] > 1e-12 * sigmas[:, 0]
        skipped_ji += int(np.count_nonzero(~regular))

        ji_b = jacs[regular] @ np.linalg.solve(jacs[regular], eye)
        accumulators["JI"].update_batch(ji_b)
        accumulators["JT"].update_batch(jacs @ jacs.transpose(0, 2, 1))
        for spec, vchain in zip(fd_specs, fd_chains):
            inertias = inertia_batch(vchain, qs)
            fd_b = jacs @ fd_matrix_batch(inertias, jacs)
            accumulators[_method_slug(spec)].update_batch(fd_b)

    paths = []
    for spec in specs:
        slug = _method_slug(spec)
        stats = accumulators[slug].finalize()
        rows = [
            (
                cfg.experiment,
                spec.label(),
                row,
                col,
                stats.mean[row, col],
                stats.std[row, col],
            )
            for row in range(6)
            for col in range(6)
        ]
        path = out / f"decoupling_{slug}.csv"
        _write_csv(path, ("experiment", "method", "row", "col", "mean", "std"), rows)
        paths.append(path)

    _write_config(out, cfg, {"skipped_singular_ji_samples": skipped_ji})
    return paths


# --- conditioning (median kappa sweeps) ---------------------------------------


def _kappas(matrices: np.ndarray) -> np.ndarray:
    sigmas = np.linalg.svd(matrices, compute_uv=False)
    with np.errstate(divide="ignore"):
        return np.where(
            sigmas[:, -1] > 0.0, sigmas[:, 0] / sigmas[:, -1], np.inf
        )


def run_conditioning(cfg: ExperimentConfig) -> list[Path]:
    """Median ill-conditioning of the type (b) matrices, swept over gamma for
    FD and alpha for DLS; each sweep point uses a fresh batch of uniform
    configurations."""
    out = _out_dir(cfg)
    chain = cfg.chain()
    per_point = cfg.samples()
    rng = np.random.default_rng(cfg.seed)

    fd_rows = []
    for gamma in cfg.gamma_list:
        vchain = build_virtual_chain(chain, VirtualModelParams(gamma, cfg.m_e, cfg.ip_e))
        qs = rng.uniform(-np.pi, np.pi, size=(per_point, chain.n))
        jacs = jacobian_batch(vchain, qs)
        matrices = jacs @ fd_matrix_batch(inertia_batch(vchain, qs), jacs)
        median = robust_median(_kappas(matrices), filtered=cfg.median_filtered)
        fd_rows.append((cfg.experiment, "FD", gamma, median, per_point))

    dls_rows = []
    for alpha in cfg.alpha_list:
        qs = rng.uniform(-np.pi, np.pi, size=(per_point, chain.n))
        jacs = jacobian_batch(chain, qs)
        matrices = jacs @ dls_matrix_batch(jacs, alpha)
        median = robust_median(_kappas(matrices), filtered=cfg.median_filtered)
        dls_rows.append((cfg.experiment, "DLS", alpha, median, per_point))

    header = ("experiment", "method", "parameter", "median_kappa", "sample_count")
    paths = [out / "conditioning_FD.csv", out / "conditioning_DLS.csv"]
    _write_csv(paths[0], header, fd_rows)
    _write_csv(paths[1], header, dls_rows)
    _write_config(out, cfg, {"median_filtered": cfg.median_filtered})
    return paths


# --- singular pass (sigma trajectories) ----------------------------------------


def waypoint_path(waypoints: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Piecewise-linear joint trajectory through the waypoints, s in [0, 1]."""
    waypoints = np.asarray(waypoints, dtype=float)
    segments = waypoints.shape[0] - 1
    if segments < 1:
        raise ValueError("need at least two waypoints")
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    scaled = s * segments
    index = np.minimum(scaled.astype(int), segments - 1)
    frac = scaled - index
    return waypoints[index] + frac[:, None] * (waypoints[index + 1] - waypoints[index])


def find_singular_crossings(
    chain: KinematicChain,
    waypoints: np.ndarray,
    resolution: int = 801,
    det_bound: float = 1e-6,
) -> list[float]:
    """Locate path parameters where |det J| drops below ``det_bound``.

    Sign changes of det J between dense samples are refined by bisection;
    samples already below the bound count directly.  Crossings closer than
    half a grid step collapse to one (they are not resolvable apart).
    """
    s_grid = np.linspace(0.0, 1.0, resolution)
    dets = np.linalg.det(jacobian_batch(chain, waypoint_path(waypoints, s_grid)))

    def det_at(s: float) -> float:
        return float(np.linalg.det(jacobian_batch(chain, waypoint_path(waypoints, np.array([s])))[0]))

    crossings = [float(s_grid[i]) for i in np.flatnonzero(np.abs(dets) < det_bound)]
    for i in np.flatnonzero(np.sign(dets[:-1]) * np.sign(dets[1:]) < 0):
        lo, hi = float(s_grid[i]), float(s_grid[i + 1])
        flo = dets[i]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fmid = det_at(mid)
            if abs(fmid) < det_bound:
                crossings.append(mid)
                break
            if np.sign(fmid) == np.sign(flo):
                lo, flo = mid, fmid
            else:
                hi = mid
    crossings.sort()
    min_gap = 0.5 / (resolution - 1)
    deduped: list[float] = []
    for c in crossings:
        if not deduped or c - deduped[-1] > min_gap:
            deduped.append(c)
    return deduped


def run_singular_pass(cfg: ExperimentConfig) -> list[Path]:
    """sigma_min / sigma_max of the type (a) matrices along a joint trajectory
    through singular configurations."""
    out = _out_dir(cfg)
    chain = cfg.chain()
    resolution = cfg.samples()
    waypoints = np.asarray(cfg.waypoints, dtype=float)
    s_grid = np.linspace(0.0, 1.0, resolution)
    qs = waypoint_path(waypoints, s_grid)

    jacs = jacobian_batch(chain, qs)
    jac_sigmas = np.linalg.svd(jacs, compute_uv=False)

    header = ("experiment", "method", "parameter", "s", "sigma_min", "sigma_max")
    paths = []

    def emit(slug: str, label: str, parameter, sig_min, sig_max) -> None:
        rows = [
            (cfg.experiment, label, parameter, s_grid[i], sig_min[i], sig_max[i])
            for i in range(resolution)
        ]
        path = out / f"singular_pass_{slug}.csv"
        _write_csv(path, header, rows)
        paths.append(path)

    # Exact inverse: singular values are the reciprocals of J's, no inversion
    # needed, so the trace stays finite-valued except at exact rank loss.
    with np.errstate(divide="ignore"):
        ji_max = np.where(jac_sigmas[:, -1] > 0.0, 1.0 / jac_sigmas[:, -1], np.inf)
    emit("JI", "JI", "", 1.0 / jac_sigmas[:, 0], ji_max)
    emit("JT", "JT", "", jac_sigmas[:, -1], jac_sigmas[:, 0])

    dls = dls_matrix_batch(jacs, cfg.pass_alpha)
    sig = np.linalg.svd(dls, compute_uv=False)
    spec = MappingSpec.dls(cfg.pass_alpha)
    emit(_method_slug(spec), spec.label(), cfg.pass_alpha, sig[:, -1], sig[:, 0])

    for gamma in cfg.pass_gammas:
        vchain = build_virtual_chain(chain, VirtualModelParams(gamma, cfg.m_e, cfg.ip_e))
        fd = fd_matrix_batch(inertia_batch(vchain, qs), jacs)
        sig = np.linalg.svd(fd, compute_uv=False)
        spec = MappingSpec.fd(gamma)
        emit(_method_slug(spec), spec.label(), gamma, sig[:, -1], sig[:, 0])

    crossings = find_singular_crossings(chain, waypoints, resolution)
    metadata = {
        "singular_crossings": crossings,
        "crossing_count": len(crossings),
        "warning": (
            None
            if len(crossings) >= 4
            else "trajectory crosses fewer than 4 singular configurations"
        ),
    }
    _write_config(out, cfg, metadata)
    return paths


# --- global singular set sweeps ------------------------------------------------


def _ensure_singular_set(cfg: ExperimentConfig, out: Path) -> SingularSet:
    path = out / "singular_set.json"
    count = cfg.samples()
    if path.exists():
        existing = load_singular_set(path)
        if (
            existing.seed == cfg.seed
            and len(existing) == count
            and existing.params.to_dict() == cfg.pso.to_dict()
        ):
            return existing
    collected = collect_singular_set(
        cfg.chain(),
        count,
        cfg.pso,
        cfg.seed,
        dedup=cfg.dedup,
        dedup_min_dist=cfg.dedup_min_dist,
    )
    save_singular_set(collected, path)
    return collected


def run_global_singular(cfg: ExperimentConfig) -> list[Path]:
    """Mean sigma_min / sigma_max of the type (a) matrices over the PSO
    singular set, swept over gamma (FD) and alpha (DLS), with JI/JT baselines."""
    out = _out_dir(cfg)
    chain = cfg.chain()
    singular_set = _ensure_singular_set(cfg, out)
    configs = singular_set.configs

    jacs = jacobian_batch(chain, configs)
    jac_sigmas = np.linalg.svd(jacs, compute_uv=False)

    header = ("experiment", "method", "parameter", "mean_sigma_min", "mean_sigma_max")

    fd_rows = []
    for gamma in cfg.gamma_list:
        vchain = build_virtual_chain(chain, VirtualModelParams(gamma, cfg.m_e, cfg.ip_e))
        sig = np.linalg.svd(
            fd_matrix_batch(inertia_batch(vchain, configs), jacs), compute_uv=False
        )
        fd_rows.append(
            (cfg.experiment, "FD", gamma, sig[:, -1].mean(), sig[:, 0].mean())
        )

    dls_rows = []
    for alpha in cfg.alpha_list:
        sig = np.linalg.svd(dls_matrix_batch(jacs, alpha), compute_uv=False)
        dls_rows.append(
            (cfg.experiment, "DLS", alpha, sig[:, -1].mean(), sig[:, 0].mean())
        )

    # Baselines.  JI singular values are reciprocals of J's; its sigma_max
    # blows up on a singular set, reported with the "inf" sentinel once any
    # sample exceeds the sentinel threshold.
    with np.errstate(divide="ignore"):
        ji_max = np.where(jac_sigmas[:, -1] > 0.0, 1.0 / jac_sigmas[:, -1], np.inf)
    ji_max_mean = (
        float("inf") if np.any(ji_max > SINGULARITY_SENTINEL) else float(ji_max.mean())
    )
    ji_row = (cfg.experiment, "JI", "", float((1.0 / jac_sigmas[:, 0]).mean()), ji_max_mean)
    jt_row = (
        cfg.experiment,
        "JT",
        "",
        float(jac_sigmas[:, -1].mean()),
        float(jac_sigmas[:, 0].mean()),
    )

    paths = [
        out / "global_singular_FD.csv",
        out / "global_singular_DLS.csv",
        out / "global_singular_JI.csv",
        out / "global_singular_JT.csv",
    ]
    _write_csv(paths[0], header, fd_rows)
    _write_csv(paths[1], header, dls_rows)
    _write_csv(paths[2], header, [ji_row])
    _write_csv(paths[3], header, [jt_row])
    _write_config(
        out,
        cfg,
        {
            "singular_set_size": len(singular_set),
            "max_residual": float(singular_set.residuals.max()),
            "sentinel_threshold": SINGULARITY_SENTINEL,
        },
    )
    return paths


# --- timing --------------------------------------------------------------------


def run_timing(cfg: ExperimentConfig) -> list[Path]:
    """Wall-clock per-call cost of computing q_dd = M(q) f for each method.

    Runs single-threaded on the JIT kernels; the random joint states are
    pre-generated (generation time is excluded) and shared across methods.
    """
    from . import fastpath

    out = _out_dir(cfg)
    chain = cfg.chain()
    samples = cfg.samples()
    warmup = cfg.timing_warmup
    rng = np.random.default_rng(cfg.seed)

    vchain = build_virtual_chain(
        chain, VirtualModelParams(cfg.timing_gamma, cfg.m_e, cfg.ip_e)
    )
    data = fastpath.chain_data(vchain)
    fastpath.warmup(data)
    qs = rng.uniform(-np.pi, np.pi, size=(samples, chain.n))
    qs_warm = rng.uniform(-np.pi, np.pi, size=(max(warmup, 1), chain.n))
    wrench = np.ones(6)

    methods = {
        "JI": (MappingSpec.ji(), lambda q: fastpath.qdd_ji(data, q, wrench)),
        "JT": (MappingSpec.jt(), lambda q: fastpath.qdd_jt(data, q, wrench)),
        "DLS": (
            MappingSpec.dls(cfg.timing_alpha),
            lambda q: fastpath.qdd_dls(data, q, wrench, cfg.timing_alpha),
        ),
        "SDLS": (
            MappingSpec.sdls(cfg.timing_sdls_limit),
            lambda q: fastpath.qdd_sdls(data, q, wrench, cfg.timing_sdls_limit),
        ),
        "FD": (
            MappingSpec.fd(cfg.timing_gamma),
            lambda q: fastpath.qdd_fd(data, q, wrench),
        ),
    }

    # Clock sanity: if calls were near the timer resolution, fall back to
    # batched measurement with per-batch division.
    resolution = _clock_resolution_ns()
    paths = []
    batched = {}
    for name, (spec, call) in methods.items():
        for i in range(warmup):
            call(qs_warm[i % qs_warm.shape[0]])
        durations = np.empty(samples)
        for i in range(samples):
            start = time.perf_counter_ns()
            call(qs[i])
            durations[i] = time.perf_counter_ns() - start

        use_batches = float(np.median(durations)) < 30.0 * resolution
        batched[name] = use_batches
        if use_batches:
            batch = 32
            batches = samples // batch
            durations = np.empty(batches)
            for b in range(batches):
                start = time.perf_counter_ns()
                for i in range(b * batch, (b + 1) * batch):
                    call(qs[i])
                durations[b] = (time.perf_counter_ns() - start) / batch

        q1, q2, q3 = np.percentile(durations, [25.0, 50.0, 75.0])
        slug = _method_slug(spec)
        path = out / f"timing_{slug}.csv"
        _write_csv(
            path,
            (
                "experiment",
                "method",
                "samples",
                "min_ns",
                "q1_ns",
                "median_ns",
                "q3_ns",
                "max_ns",
            ),
            [
                (
                    cfg.experiment,
                    spec.label(),
                    durations.size,
                    durations.min(),
                    q1,
                    q2,
                    q3,
                    durations.max(),
                )
            ],
        )
        paths.append(path)

    _write_config(
        out,
        cfg,
        {
            "implementation": "numba-jit kernels, single-threaded",
            "wrench": "constant ones(6)",
            "clock_resolution_ns": resolution,
            "batched_measurement": batched,
            "q_generation_excluded": True,
            "warmup_calls": warmup,
        },
    )
    return paths


def _clock_resolution_ns() -> float:
    deltas = []
    for _ in range(200):
        a = time.perf_counter_ns()
        b = time.perf_counter_ns()
        while b == a:
            b = time.perf_counter_ns()
        deltas.append(b - a)
    return float(np.median(deltas))


# --- closed loop -----------------------------------------------------------------


def sample_reachable_target(
    chain: KinematicChain,
    rng: np.random.Generator,
    min_manipulability: float,
    q0: Optional[np.ndarray] = None,
    radius: Optional[float] = None,
):
    """Seeded nonsingular target configuration; returns (q_target, pose).

    With ``q0`` and ``radius`` the target is a bounded joint-space
    perturbation of the start; pure Cartesian-error flows have spurious
    equilibria at full extension (the error component orthogonal to the
    reachable directions cannot decrease there), so workspace-spanning jumps
    that force the elbow through a lobe flip are not valid convergence
    targets for any of the mapping methods.  Without them the sample is
    uniform over the whole joint box.
    """
    while True:
        if q0 is not None and radius is not None:
            q = np.clip(
                np.asarray(q0, dtype=float) + rng.uniform(-radius, radius, chain.n),
                -np.pi,
                np.pi,
            )
        else:
            q = rng.uniform(-np.pi, np.pi, chain.n)
        jac = jacobian_batch(chain, q[None, :])[0]
        if abs(np.linalg.det(jac)) > min_manipulability:
            return q, forward_kinematics(chain, q)


def run_closed_loop(cfg: ExperimentConfig) -> list[Path]:
    """Error trace(s) of the forward-dynamics closed loop toward sampled
    reachable targets."""
    out = _out_dir(cfg)
    chain = cfg.chain()
    steps = cfg.samples()
    rng = np.random.default_rng(cfg.seed)
    params = VirtualModelParams(cfg.loop_gamma, cfg.m_e, cfg.ip_e)
    gain = cfg.gain * np.eye(6)
    q0 = np.asarray(cfg.q0, dtype=float)

    rows = []
    metadata = {"targets": [], "diverged": False}
    paths = [out / "closed_loop_FD.csv"]
    label = MappingSpec.fd(cfg.loop_gamma).label()
    try:
        for target_id in range(cfg.targets):
            _, pose = sample_reachable_target(
                chain, rng, cfg.min_target_manipulability, q0=q0, radius=cfg.target_radius
            )
            try:
                result = closed_loop_simulate(
                    chain,
                    params,
                    q0,
                    pose,
                    gain,
                    cfg.dt,
                    steps,
                    rest_each_cycle=cfg.reset_rest,
                    stop_below=cfg.stop_below,
                )
            except DivergenceError as exc:
                if exc.result is not None:
                    for step, err in enumerate(exc.result.error_norms):
                        rows.append((cfg.experiment, label, target_id, step, err))
                metadata["diverged"] = True
                metadata["targets"].append(
                    {"target_id": target_id, "diverged": True, "detail": str(exc)}
                )
                raise
            for step, err in enumerate(result.error_norms):
                rows.append((cfg.experiment, label, target_id, step, err))
            metadata["targets"].append(
                {
                    "target_id": target_id,
                    "final_error": result.final_error,
                    "converged_at": result.converged_at,
                }
            )
    finally:
        _write_csv(
            paths[0],
            ("experiment", "method", "target_id", "step", "error_norm"),
            rows,
        )
        _write_config(out, cfg, metadata)
    return paths


RUNNERS = {
    "decoupling": run_decoupling,
    "conditioning": run_conditioning,
    "singular-pass": run_singular_pass,
    "global-singular": run_global_singular,
    "timing": run_timing,
    "closed-loop": run_closed_loop,
}


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    return RUNNERS[cfg.experiment](cfg)

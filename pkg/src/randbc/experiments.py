"""Monte-Carlo studies of constraint non-vanishing under random boundary data.

Solutions for random boundary draws are synthesized from the solved basis
dictionary by linearity (u = sum_k a_k z_k), so a whole experiment costs K
PDE solves regardless of the number of draws.  Covered studies:

  success_curve           P(min over window of max_l |zeta^l| >= tau) vs N,
                          with nested (coupled) draws across N and Wilson
                          score intervals;
  variance_identity_check E zeta(u)^2 against the weighted series over basis
                          pairs, scored as z-values;
  tail_check              survival of the spectral boundary norm against a
                          fitted gaussian tail 2 exp(-c1 t^2);
  concentration_check     deviation of empirical means of zeta^2 around the
                          series value against a fitted mixed bound.

Randomness is keyed per work item (seed, repetition index), so thread count
changes wall time only, never a single emitted number.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .boundary import RandomBoundaryModel, mode_frequencies, sample_coeffs
from .constraints import (ConstraintField, ConstraintMap, CoverLabeling,
                          extract_cover, max_abs, values_from_parts, zeta_eval)
from .errors import ConfigError, DomainError
from .grid import Grid2D, SubdomainMask, default_window
from .runge import Dictionary, build_dictionary
from .solver import CoefficientField, gradient
from .streams import derive_rng

Z95 = 1.959963984540054


@dataclass(eq=False)
class TrialConfig:
    """One experiment setting: equation, boundary law, map, window, N draws."""

    grid: Grid2D
    coeff: CoefficientField
    model: RandomBoundaryModel
    cmap: ConstraintMap
    N: int
    mask: SubdomainMask | None = None
    dictionary: Dictionary | None = None

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool):
            raise ConfigError(f"N must be an integer, got {self.N!r}")
        self.N = int(self.N)
        if self.N < 1:
            raise ConfigError(f"need at least one measurement, got N={self.N}")
        if self.mask is None:
            self.mask = default_window(self.grid)
        if self.mask.grid_n != self.grid.n:
            raise ConfigError("mask grid size does not match the experiment grid")
        if self.mask.count == 0:
            raise DomainError("observation window contains no grid nodes")


def ensure_dictionary(cfg: TrialConfig) -> Dictionary:
    """Build (once) and cache the solved basis on the config."""
    if cfg.dictionary is None:
        cfg.dictionary = build_dictionary(cfg.grid, cfg.coeff, cfg.model)
    if cfg.dictionary.K != cfg.model.K:
        raise ConfigError(
            f"dictionary has K={cfg.dictionary.K}, model has K={cfg.model.K}")
    return cfg.dictionary


@dataclass(eq=False)
class _Parts:
    """Dictionary values and gradients restricted to evaluation nodes."""

    vals: np.ndarray              # (K, m)
    gxs: np.ndarray | None        # (K, m)
    gys: np.ndarray | None


def _restrict_parts(dictionary: Dictionary, ix, iy, need_grads: bool) -> _Parts:
    K = dictionary.K
    m = len(ix)
    vals = np.empty((K, m))
    gxs = np.empty((K, m)) if need_grads else None
    gys = np.empty((K, m)) if need_grads else None
    for k in range(K):
        zk = dictionary.z[k]
        vals[k] = zk[ix, iy]
        if need_grads:
            gx, gy = gradient(dictionary.grid, zk)
            gxs[k] = gx[ix, iy]
            gys[k] = gy[ix, iy]
    return _Parts(vals=vals, gxs=gxs, gys=gys)


def _window_parts(cfg: TrialConfig) -> _Parts:
    d = ensure_dictionary(cfg)
    ix, iy = cfg.mask.indices
    return _restrict_parts(d, ix, iy, need_grads=(cfg.cmap.kind != "nodal"))


def _constraint_rows(cmap: ConstraintMap, parts: _Parts,
                     coeffs: np.ndarray) -> np.ndarray:
    """(N, m) constraint values for N synthesized measurement tuples.

    coeffs has shape (N, arity, K).
    """
    N = coeffs.shape[0]
    if cmap.kind == "nodal":
        return coeffs[:, 0, :] @ parts.vals
    if cmap.kind == "critical":
        d0, d1 = cmap.direction
        return d0 * (coeffs[:, 0, :] @ parts.gxs) + d1 * (coeffs[:, 0, :] @ parts.gys)
    if cmap.kind == "jacobian":
        g1x = coeffs[:, 0, :] @ parts.gxs
        g1y = coeffs[:, 0, :] @ parts.gys
        g2x = coeffs[:, 1, :] @ parts.gxs
        g2y = coeffs[:, 1, :] @ parts.gys
        return g1x * g2y - g1y * g2x
    rows = np.empty((N, parts.vals.shape[1]))
    for l in range(N):
        uv = [coeffs[l, i, :] @ parts.vals for i in range(3)]
        ux = [coeffs[l, i, :] @ parts.gxs for i in range(3)]
        uy = [coeffs[l, i, :] @ parts.gys for i in range(3)]
        rows[l] = values_from_parts(cmap, uv, ux, uy)
    return rows


@dataclass
class TrialOutcome:
    min_max: float
    labels: CoverLabeling | None
    reference_tau: float | None

    def success_at(self, tau: float) -> bool:
        return self.min_max >= tau


def trial_fields(cfg: TrialConfig, trial_seed: int) -> list:
    """Draw and evaluate one trial's N constraint fields, kept for inspection."""
    parts = _window_parts(cfg)
    rng = derive_rng(trial_seed)
    coeffs = sample_coeffs(cfg.model, rng, cfg.N * cfg.cmap.arity)
    coeffs = coeffs.reshape(cfg.N, cfg.cmap.arity, cfg.model.K)
    rows = _constraint_rows(cfg.cmap, parts, coeffs)
    return [ConstraintField(values=rows[l], mask=cfg.mask)
            for l in range(cfg.N)]


def run_trial(cfg: TrialConfig, trial_seed: int, inject_fields=None,
              reference_tau: float | None = None) -> TrialOutcome:
    """One trial: draw (or inject) N measurements, evaluate, take min over window.

    inject_fields, when given, is a sequence of solution tuples (full-grid
    fields) used verbatim instead of random draws; this gives deterministic
    positive controls such as the witness tuples.
    """
    if inject_fields is not None:
        cfields = [zeta_eval(cfg.cmap, tup, cfg.grid, cfg.mask)
                   for tup in inject_fields]
        if len(cfields) == 0:
            raise ConfigError("inject_fields must hold at least one tuple")
    else:
        cfields = trial_fields(cfg, trial_seed)
    _, min_max = max_abs(cfields)
    labels = None
    if reference_tau is not None:
        labels = extract_cover(cfields, reference_tau)
    return TrialOutcome(min_max=min_max, labels=labels, reference_tau=reference_tau)


def wilson_interval(successes: int, total: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total <= 0 or not (0 <= successes <= total):
        raise ConfigError(f"invalid count {successes}/{total}")
    phat = successes / total
    denom = 1.0 + z * z / total
    center = (phat + z * z / (2.0 * total)) / denom
    half = z * np.sqrt(phat * (1.0 - phat) / total + z * z / (4.0 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class SuccessRow:
    N: int
    successes: int
    M: int
    rate: float
    lo95: float
    hi95: float
    tau: float


@dataclass(eq=False)
class SuccessCurveResult:
    rows: list
    tau: float
    min_max: np.ndarray          # (M, len(N_values)) per-trial nested min-max
    N_values: list
    cover_complete_count: int    # trials at max N whose cover is complete at tau
    M: int


def success_curve(cfg: TrialConfig, N_values, M: int, tau="auto",
                  master_seed: int = 0, threads: int = 1) -> SuccessCurveResult:
    """Empirical success probability of min-max >= tau across N, coupled draws.

    Draws are nested: each repetition draws coefficients for the largest N
    once and every smaller N uses a prefix, so per-trial min-max is exactly
    non-decreasing in N.  tau="auto" calibrates the threshold to the
    empirical 5% quantile (floor(0.05 M)-th smallest) of min-max at the
    largest N.
    """
    if not isinstance(M, (int, np.integer)) or M < 50:
        raise ConfigError(f"need at least 50 repetitions for the curve, got M={M!r}")
    M = int(M)
    Ns = sorted({int(N) for N in N_values})
    if len(Ns) == 0:
        raise ConfigError("N_values must be nonempty")
    if Ns[0] < 1:
        raise ConfigError(f"measurement counts must be >= 1, got {Ns[0]}")
    N_max = Ns[-1]
    arity = cfg.cmap.arity
    parts = _window_parts(cfg)
    K = cfg.model.K

    def one_rep(rep: int):
        rng = derive_rng(master_seed, rep)
        coeffs = sample_coeffs(cfg.model, rng, N_max * arity).reshape(N_max, arity, K)
        rows = _constraint_rows(cfg.cmap, parts, coeffs)
        running = np.maximum.accumulate(np.abs(rows), axis=0)
        mins = np.array([running[N - 1].min() for N in Ns])
        return mins, rows

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_rep, range(M)))
    else:
        results = [one_rep(rep) for rep in range(M)]

    min_max = np.stack([r[0] for r in results])          # (M, len(Ns))
    if isinstance(tau, str):
        if tau != "auto":
            raise ConfigError(f"tau must be a nonnegative number or 'auto', got {tau!r}")
        k = max(1, int(np.floor(0.05 * M)))
        tau_val = float(np.sort(min_max[:, -1])[k - 1])
        if tau_val <= 0.0:
            raise DomainError("auto threshold collapsed to zero; draws are degenerate")
    else:
        tau_val = float(tau)
        if not (tau_val >= 0.0):
            raise ConfigError(f"tau must be nonnegative, got {tau}")

    rows_out = []
    for j, N in enumerate(Ns):
        successes = int(np.sum(min_max[:, j] >= tau_val))
        lo, hi = wilson_interval(successes, M)
        rows_out.append(SuccessRow(N=N, successes=successes, M=M,
                                   rate=successes / M, lo95=lo, hi95=hi, tau=tau_val))

    complete = 0
    if tau_val == 0.0:
        # Zero threshold: every point trivially clears it, covers are complete.
        complete = M
    else:
        for _, raw in results:
            cfields = [ConstraintField(values=raw[l], mask=cfg.mask)
                       for l in range(N_max)]
            if extract_cover(cfields, tau_val).complete:
                complete += 1

    return SuccessCurveResult(rows=rows_out, tau=tau_val, min_max=min_max,
                              N_values=Ns, cover_complete_count=complete, M=M)


DEFAULT_PROBE_FRACTIONS = (0.3125, 0.5, 0.6875)


def default_probes(grid: Grid2D) -> list[tuple[float, float]]:
    """3 x 3 probe lattice inside the standard window (exact nodes for dyadic n)."""
    return [(fx, fy) for fx in DEFAULT_PROBE_FRACTIONS for fy in DEFAULT_PROBE_FRACTIONS]


@dataclass(frozen=True)
class VarianceRow:
    x: float
    y: float
    mc: float
    series: float
    z: float


def variance_identity_check(cfg: TrialConfig, x_points=None, M: int = 10000,
                            master_seed: int = 0) -> list[VarianceRow]:
    """Monte-Carlo E[zeta(u)^2] against the exact weighted series at probes.

    Supported maps: arity 1 (nodal, critical) always; jacobian only as a
    K^2-summed slow path for K <= 8.  z scores use the sample standard error.
    """
    arity = cfg.cmap.arity
    if arity == 2 and cfg.model.K > 8:
        raise ConfigError(
            f"pair series needs K <= 8 (K^2 terms), got K={cfg.model.K}")
    if arity > 2:
        raise ConfigError("variance series is implemented for maps of arity 1 and 2")
    if not isinstance(M, (int, np.integer)) or M < 2:
        raise ConfigError(f"need at least two samples, got M={M!r}")
    M = int(M)
    if x_points is None:
        x_points = default_probes(cfg.grid)

    dictionary = ensure_dictionary(cfg)
    ixs, iys = [], []
    for p in x_points:
        ix, iy = cfg.grid.nearest_node(p)
        if not cfg.mask.member[ix, iy]:
            raise ConfigError(f"probe {p!r} snaps to ({ix}, {iy}) outside the window")
        ixs.append(ix)
        iys.append(iy)
    ixs = np.array(ixs)
    iys = np.array(iys)
    parts = _restrict_parts(dictionary, ixs, iys,
                            need_grads=(cfg.cmap.kind != "nodal"))
    sig2 = cfg.model.sigma ** 2
    rng = derive_rng(master_seed, 0)

    if arity == 1:
        if cfg.cmap.kind == "nodal":
            w = parts.vals                                    # (K, P)
        else:
            d0, d1 = cfg.cmap.direction
            w = d0 * parts.gxs + d1 * parts.gys
        series = sig2 @ (w * w)                               # (P,)
        draws = sample_coeffs(cfg.model, rng, M)              # (M, K)
        sq = (draws @ w) ** 2                                 # (M, P)
    else:
        txy = (parts.gxs[:, None, :] * parts.gys[None, :, :]
               - parts.gys[:, None, :] * parts.gxs[None, :, :])   # (K, K, P)
        series = np.einsum("i,j,ijp->p", sig2, sig2, txy * txy)
        draws = sample_coeffs(cfg.model, rng, 2 * M).reshape(M, 2, cfg.model.K)
        u1x = draws[:, 0, :] @ parts.gxs
        u1y = draws[:, 0, :] @ parts.gys
        u2x = draws[:, 1, :] @ parts.gxs
        u2y = draws[:, 1, :] @ parts.gys
        sq = (u1x * u2y - u1y * u2x) ** 2

    mc = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / np.sqrt(M)
    diff = mc - series
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0.0, diff / se,
                     np.where(diff == 0.0, 0.0, np.inf * np.sign(diff)))
    xs = cfg.grid.xs
    return [VarianceRow(x=float(xs[ixs[j]]), y=float(xs[iys[j]]),
                        mc=float(mc[j]), series=float(series[j]), z=float(z[j]))
            for j in range(len(ixs))]


@dataclass(frozen=True)
class TailRow:
    t: float
    survival: float
    bound: float


@dataclass(frozen=True)
class TailReport:
    c1_hat: float
    rows: list
    dominated: bool
    M: int
    family: str


def tail_check(model: RandomBoundaryModel, M: int, t_grid=None,
               master_seed: int = 0) -> TailReport:
    """Fit the largest c1 with 2 exp(-c1 t^2) >= P(||phi|| >= t) on a t-grid.

    The norm is the spectral H^{1/2} surrogate of the sampled boundary data.
    """
    if not isinstance(M, (int, np.integer)) or M < 1000:
        raise ConfigError(f"tail check needs at least 1000 samples, got M={M!r}")
    M = int(M)
    draws = sample_coeffs(model, derive_rng(master_seed, 0), M)
    m = mode_frequencies(model.K).astype(float)
    weights = np.sqrt(1.0 + m * m)
    nrm = np.sqrt((draws * draws) @ weights)
    if t_grid is None:
        levels = np.geomspace(0.5, 5.0 / M, 24)
        t_grid = np.quantile(nrm, 1.0 - levels)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0.0):
        raise ConfigError("tail thresholds must be nonnegative")

    survival = np.array([(nrm >= t).mean() for t in t_grid])
    usable = (t_grid > 0.0) & (survival > 0.0)
    if not np.any(usable):
        raise DomainError("no usable tail points; sampled norms are degenerate")
    c1 = float(np.min(np.log(2.0 / survival[usable]) / t_grid[usable] ** 2))
    bound = 2.0 * np.exp(-c1 * t_grid ** 2)
    rows = [TailRow(t=float(t_grid[j]), survival=float(survival[j]),
                    bound=float(bound[j])) for j in range(len(t_grid))]
    dominated = bool(np.all(bound >= survival - 1e-12))
    return TailReport(c1_hat=c1, rows=rows, dominated=dominated, M=M,
                      family=model.family)


@dataclass(frozen=True)
class ConcentrationRow:
    N: int
    t: float
    p_emp: float
    bound: float


@dataclass(frozen=True)
class ConcentrationReport:
    C_hat: float
    mu: float
    rows: list


def concentration_check(cfg: TrialConfig, N_values, M: int, x_point=None,
                        levels=(0.5, 0.2, 0.1, 0.05, 0.02),
                        master_seed: int = 0) -> ConcentrationReport:
    """Deviation of mean_l zeta(u_l)^2 from the series mean, with a fitted
    mixed bound 2 exp(-C min(N t^2, t N)) per sampled (N, t)."""
    if cfg.cmap.arity != 1:
        raise ConfigError("concentration check is implemented for arity-1 maps")
    if not isinstance(M, (int, np.integer)) or M < 100:
        raise ConfigError(f"need at least 100 repetitions, got M={M!r}")
    M = int(M)
    Ns = sorted({int(N) for N in N_values})
    if not Ns or Ns[0] < 1:
        raise ConfigError(f"bad N_values {N_values!r}")

    dictionary = ensure_dictionary(cfg)
    if x_point is None:
        x_point = (0.5, 0.5)
    ix, iy = cfg.grid.nearest_node(x_point)
    if not cfg.mask.member[ix, iy]:
        raise ConfigError(f"probe {x_point!r} lies outside the window")
    parts = _restrict_parts(dictionary, np.array([ix]), np.array([iy]),
                            need_grads=(cfg.cmap.kind != "nodal"))
    if cfg.cmap.kind == "nodal":
        w = parts.vals[:, 0]
    else:
        d0, d1 = cfg.cmap.direction
        w = d0 * parts.gxs[:, 0] + d1 * parts.gys[:, 0]
    mu = float((cfg.model.sigma ** 2) @ (w * w))

    rows = []
    fits = []
    for N in Ns:
        draws = sample_coeffs(cfg.model, derive_rng(master_seed, N), M * N)
        vals = (draws @ w) ** 2
        dev = np.abs(vals.reshape(M, N).mean(axis=1) - mu)
        for lev in levels:
            t = float(np.quantile(dev, 1.0 - lev))
            p_emp = float((dev >= t).mean()) if t > 0.0 else 1.0
            rows.append([N, t, p_emp])
            if t > 0.0 and p_emp > 0.0:
                fits.append(np.log(2.0 / p_emp) / min(N * t * t, t * N))
    C_hat = float(min(fits)) if fits else float("inf")
    out = [ConcentrationRow(N=r[0], t=r[1], p_emp=r[2],
                            bound=float(2.0 * np.exp(-C_hat * min(r[0] * r[1] ** 2,
                                                                  r[1] * r[0]))))
           for r in rows]
    return ConcentrationReport(C_hat=C_hat, mu=mu, rows=out)

"""Monte Carlo campaign over Poisson network snapshots.

Each trial draws every tier's BSs and the users as Poisson processes in a
disk of radius ``r_sim`` centred on a probe user, runs the truncated
biased-power association for all users, marks BSs with at least one user
as active and measures the probe's SINR when it is the user served in the
slot.

Every random ingredient of a trial (each tier's BSs, the users, activation
coins, fading) has its own stream keyed by ``(seed, trial)``.  Points are
generated outward from the origin, so enlarging ``r_sim`` keeps the inner
snapshot and only adds points beyond the old edge.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..model import derive, serving_radius_sq, validate
from .kernels import nearest_sites

ACTIVATION_MODES = ("association", "independent", "full")
WINDOW_FACTOR = 5.0
WINDOW_CELLS = 10.0
_FIRST_BLOCK = 1024


def default_radius(config, c=WINDOW_CELLS):
    """max(5 max_k R_k, c / sqrt(pi lambda_min)), dropping infinite R_k."""
    lam_min = min(t.density for t in config.tiers)
    r = c / math.sqrt(math.pi * lam_min)
    finite = [math.sqrt(serving_radius_sq(config, k)) for k in range(config.num_tiers)]
    finite = [x for x in finite if math.isfinite(x)]
    if finite:
        r = max(r, WINDOW_FACTOR * max(finite))
    return r


def interference_tail(config, r_sim):
    """Mean interference power from an all-active network beyond ``r_sim``.

    sum_j 2 pi lambda_j P_j r^(2-alpha_j) / (alpha_j - 2); an upper bound on
    what the finite window leaves out.
    """
    return math.fsum(
        2.0 * math.pi * t.density * t.power_watts * r_sim ** (2.0 - t.pathloss_exp) / (t.pathloss_exp - 2.0)
        for t in config.tiers
    )


class TrialStreams:
    """Independent generators for the parts of one trial.

    ``bs[k]``, ``users``, ``coins[k]``, ``fading[k]`` and ``gain`` are
    spawned in a fixed order from ``SeedSequence([seed, index])``.
    """

    def __init__(self, seed, index, num_tiers):
        ss = np.random.SeedSequence([int(seed), int(index)])
        kids = [np.random.default_rng(c) for c in ss.spawn(3 * num_tiers + 2)]
        self.bs = kids[:num_tiers]
        self.coins = kids[num_tiers : 2 * num_tiers]
        self.fading = kids[2 * num_tiers : 3 * num_tiers]
        self.users = kids[-2]
        self.gain = kids[-1]


def trial_streams(config, seed, index):
    return TrialStreams(seed, index, config.num_tiers)


def radial_ppp(rng, density, r):
    """Homogeneous PPP in the disk of radius ``r``, sorted by distance.

    pi * density * |x_(i)|^2 are the arrival times of a unit-rate Poisson
    process.  Draws come in blocks of a fixed size schedule, so the points
    for a larger radius extend those for a smaller one.
    """
    cap = math.pi * density * r * r
    xs, ys = [], []
    t0 = 0.0
    block = _FIRST_BLOCK
    while True:
        e = rng.standard_exponential(block)
        th = rng.random(block)
        t = t0 + np.cumsum(e)
        keep = t <= cap
        rad = np.sqrt(t[keep] / (math.pi * density))
        ang = 2.0 * np.pi * th[keep]
        xs.append(rad * np.cos(ang))
        ys.append(rad * np.sin(ang))
        if not keep[-1]:
            break
        t0 = float(t[-1])
        block *= 2
    return np.concatenate(xs), np.concatenate(ys)


@dataclass
class NetRealization:
    """One network snapshot.  Tier indices are 0-based; -1 means none."""

    r_sim: float
    bs_x: list
    bs_y: list
    active: list
    user_x: np.ndarray | None = None
    user_y: np.ndarray | None = None
    user_tier: np.ndarray | None = None
    user_bs: np.ndarray | None = None
    loads: list | None = None
    # activity the other users alone would cause; estimates A_k without the probe's bias
    ambient_active: list | None = None
    probe_tier: int = -1
    probe_bs: int = -1
    probe_d2: float = math.inf


def _associate(config, xs, ys, bs_x, bs_y):
    """Tier and BS index maximising truncated biased received power, per point."""
    n = xs.shape[0]
    best = np.full(n, -np.inf)
    tier = np.full(n, -1, dtype=np.int64)
    bs = np.full(n, -1, dtype=np.int64)
    d2_best = np.full(n, np.inf)
    eps = config.access_threshold
    for k, t in enumerate(config.tiers):
        idx, d2 = nearest_sites(xs, ys, bs_x[k], bs_y[k])
        with np.errstate(divide="ignore"):
            metric = math.log(t.omega) - 0.5 * t.pathloss_exp * np.log(d2)
        ok = idx >= 0
        if eps > 0:
            ok &= metric >= math.log(eps)
        # strict comparison: the lower tier index keeps ties
        take = ok & (metric > best)
        best = np.where(take, metric, best)
        tier = np.where(take, k, tier)
        bs = np.where(take, idx, bs)
        d2_best = np.where(take, d2, d2_best)
    return tier, bs, d2_best


def sample_realization(config, r_sim, streams, activation="association"):
    """Draw BSs and users, associate them and decide which BSs transmit.

    ``activation`` is "association" (a BS is active iff a user picked it),
    "independent" (each BS active with its analytic activation probability,
    the probe's server always active) or "full" (every BS active).  Users are
    only drawn in the first mode.
    """
    if activation not in ACTIVATION_MODES:
        raise ValueError(f"activation must be one of {ACTIVATION_MODES}, got {activation!r}")
    bs_x, bs_y = [], []
    for k, t in enumerate(config.tiers):
        x, y = radial_ppp(streams.bs[k], t.density, r_sim)
        bs_x.append(x)
        bs_y.append(y)
    real = NetRealization(r_sim=r_sim, bs_x=bs_x, bs_y=bs_y, active=[])
    if activation == "association":
        ux, uy = radial_ppp(streams.users, config.user_density, r_sim)
        # the probe sits at the origin and carries load like any other user
        ux = np.concatenate(([0.0], ux))
        uy = np.concatenate(([0.0], uy))
        tier, bs, d2 = _associate(config, ux, uy, bs_x, bs_y)
        loads = []
        for k in range(config.num_tiers):
            sel = bs[tier == k]
            loads.append(np.bincount(sel, minlength=bs_x[k].shape[0]))
        real.user_x, real.user_y, real.user_tier, real.user_bs = ux, uy, tier, bs
        real.loads = loads
        real.active = [ld > 0 for ld in loads]
        real.probe_tier, real.probe_bs, real.probe_d2 = int(tier[0]), int(bs[0]), float(d2[0])
        real.ambient_active = [a.copy() for a in real.active]
        if real.probe_tier >= 0:
            k = real.probe_tier
            real.ambient_active[k][real.probe_bs] = loads[k][real.probe_bs] > 1
        return real
    origin = np.zeros(1)
    tier, bs, d2 = _associate(config, origin, origin, bs_x, bs_y)
    real.probe_tier, real.probe_bs, real.probe_d2 = int(tier[0]), int(bs[0]), float(d2[0])
    if activation == "full":
        real.active = [np.ones(x.shape[0], dtype=bool) for x in bs_x]
        real.ambient_active = real.active
    else:
        d = derive(config)
        real.active = [streams.coins[k].random(x.shape[0]) < d[k].activation_prob for k, x in enumerate(bs_x)]
        real.ambient_active = [a.copy() for a in real.active]
        if real.probe_tier >= 0:
            real.active[real.probe_tier][real.probe_bs] = True
    return real


@dataclass(frozen=True)
class TrialResult:
    tier: int
    sinr: float
    sir: float
    serving_d2: float
    serving_load: int
    bs_inner: tuple
    active_inner: tuple

    @property
    def served(self):
        return self.tier >= 0


def measure_sinr(real, config, streams):
    """Probe SINR and SIR in one slot where the probe is the scheduled user.

    Desired gain Gamma(M_k, 1); every other active BS adds P_j E r^-alpha_j
    with E ~ Exp(1).  Unserved probes return NaN ratios.
    """
    inner = real.r_sim / 2.0
    bs_inner, act_inner = [], []
    for k in range(config.num_tiers):
        m = real.bs_x[k] ** 2 + real.bs_y[k] ** 2 <= inner * inner
        bs_inner.append(int(np.count_nonzero(m)))
        ambient = real.active[k] if real.ambient_active is None else real.ambient_active[k]
        act_inner.append(int(np.count_nonzero(m & ambient)))
    k = real.probe_tier
    if k < 0:
        return TrialResult(-1, math.nan, math.nan, math.nan, 0, tuple(bs_inner), tuple(act_inner))
    tk = config.tiers[k]
    gain = streams.gain.gamma(tk.antennas, 1.0)
    desired = tk.power_watts * gain * real.probe_d2 ** (-tk.pathloss_exp / 2.0)
    parts = []
    for j, t in enumerate(config.tiers):
        act = real.active[j].copy()
        if j == k:
            act[real.probe_bs] = False
        # one draw per BS in distance order, used or not, keeps windows nested
        e = streams.fading[j].standard_exponential(act.shape[0])[act]
        r2 = real.bs_x[j][act] ** 2 + real.bs_y[j][act] ** 2
        parts.append(np.sum(t.power_watts * e * r2 ** (-t.pathloss_exp / 2.0)))
    interf = math.fsum(parts)
    load = int(real.loads[k][real.probe_bs]) if real.loads is not None else 1
    sir = desired / interf if interf > 0 else math.inf
    sinr = desired / (interf + config.noise_watts) if (interf + config.noise_watts) > 0 else math.inf
    return TrialResult(k, sinr, sir, real.probe_d2, load, tuple(bs_inner), tuple(act_inner))


def run_trial(config, r_sim, seed, index, activation="association"):
    streams = trial_streams(config, seed, index)
    real = sample_realization(config, r_sim, streams, activation)
    return measure_sinr(real, config, streams)


@dataclass(frozen=True)
class Estimate:
    """Point estimate, its standard error and the number of trials behind it.

    ``fraction`` marks estimates of a probability; when every sample agreed
    (SE zero) they are judged by the spread the target itself implies.
    """

    value: float
    se: float
    n: int
    fraction: bool = False

    def within(self, target, sigmas=3.0):
        se = self.se
        if se == 0.0 and self.fraction and 0.0 <= target <= 1.0 and self.n > 0:
            se = math.sqrt(target * (1.0 - target) / self.n)
        return abs(self.value - target) <= sigmas * se


def _binomial(hits, n):
    if n == 0:
        return Estimate(math.nan, math.nan, 0, True)
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / (n - 1)) if n >= 2 else math.nan
    return Estimate(p, se, n, True)


def _mean(x):
    n = x.shape[0]
    if n == 0:
        return Estimate(math.nan, math.nan, 0)
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n >= 2 else math.nan
    return Estimate(float(np.mean(x)), se, n)


def _ratio(num, den):
    """Ratio of sums across trials with the delta-method cluster SE."""
    n = num.shape[0]
    tot = float(np.sum(den))
    if tot == 0:
        return Estimate(math.nan, math.nan, n, True)
    r = float(np.sum(num)) / tot
    if n < 2:
        return Estimate(r, math.nan, n, True)
    resid = num - r * den
    se = math.sqrt(float(np.sum(resid * resid)) * n / (n - 1)) / tot
    return Estimate(r, se, n, True)


@dataclass
class CampaignReport:
    """Per-trial records plus the standard estimators built from them."""

    config: object
    trials: int
    seed: int
    r_sim: float
    activation: str
    tail_interference: float
    tier: np.ndarray
    sinr: np.ndarray
    sir: np.ndarray
    serving_d2: np.ndarray
    bs_inner: np.ndarray
    active_inner: np.ndarray
    cache: dict = field(default_factory=dict, repr=False)

    def assoc(self, k):
        return _binomial(int(np.count_nonzero(self.tier == k)), self.trials)

    def no_coverage(self):
        return _binomial(int(np.count_nonzero(self.tier < 0)), self.trials)

    def activation_frac(self, k):
        return _ratio(self.active_inner[:, k].astype(float), self.bs_inner[:, k].astype(float))

    def outage(self, k, beta, noise=True):
        """Fraction of tier-k trials whose SINR (or SIR) falls below ``beta``."""
        sel = self.tier == k
        vals = (self.sinr if noise else self.sir)[sel]
        return _binomial(int(np.count_nonzero(vals < beta)), int(np.count_nonzero(sel)))

    def rate_samples(self, k=None, noise=True):
        vals = self.sinr if noise else self.sir
        r = np.where(self.tier >= 0, np.log2(1.0 + np.where(self.tier >= 0, vals, 0.0)), 0.0)
        return r if k is None else r[self.tier == k]

    def aar(self, k=None, noise=True):
        """Mean log2(1 + SINR); overall counts unserved trials as zero."""
        return _mean(self.rate_samples(k, noise))

    def ant(self, noise=False):
        """Area throughput composed from activation and per-tier success estimates."""
        val, var = [], []
        for k, t in enumerate(self.config.tiers):
            a = self.activation_frac(k)
            o = self.outage(k, t.sinr_threshold, noise)
            rk = math.log2(1.0 + t.sinr_threshold)
            c = t.density * rk
            val.append(c * a.value * (1.0 - o.value))
            var.append(c * c * ((1.0 - o.value) ** 2 * a.se**2 + a.value**2 * o.se**2))
        return Estimate(math.fsum(val), math.sqrt(math.fsum(var)), self.trials)


def _run_chunk(args):
    config, r_sim, seed, lo, hi, activation = args
    return [run_trial(config, r_sim, seed, i, activation) for i in range(lo, hi)]


def run_campaign(config, trials, seed, r_sim=None, activation="association", workers=1):
    """Run ``trials`` independent snapshots and collect the per-trial records.

    Results depend only on (config, trials, seed, r_sim, activation): each
    trial has its own RNG stream and records are kept in trial order, so the
    worker count does not change the output.
    """
    validate(config)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if r_sim is None:
        r_sim = default_radius(config)
    finite = [serving_radius_sq(config, k) for k in range(config.num_tiers)]
    if any(math.isfinite(x) and math.sqrt(x) >= r_sim for x in finite):
        raise ValueError("r_sim must exceed every finite serving radius")
    if workers <= 1:
        results = _run_chunk((config, r_sim, seed, 0, trials, activation))
    else:
        step = max(1, math.ceil(trials / (4 * workers)))
        jobs = [(config, r_sim, seed, lo, min(trials, lo + step), activation) for lo in range(0, trials, step)]
        results = []
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for chunk in ex.map(_run_chunk, jobs):
                results.extend(chunk)
    K = config.num_tiers
    return CampaignReport(
        config=config,
        trials=trials,
        seed=seed,
        r_sim=r_sim,
        activation=activation,
        tail_interference=interference_tail(config, r_sim),
        tier=np.array([r.tier for r in results], dtype=np.int64),
        sinr=np.array([r.sinr for r in results]),
        sir=np.array([r.sir for r in results]),
        serving_d2=np.array([r.serving_d2 for r in results]),
        bs_inner=np.array([r.bs_inner for r in results], dtype=np.int64).reshape(trials, K),
        active_inner=np.array([r.active_inner for r in results], dtype=np.int64).reshape(trials, K),
    )

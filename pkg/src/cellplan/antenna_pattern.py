"""Array pattern synthesis, azimuth spreading and two-level ERP fitting.

Patterns live on the upper half-plane, angles ``phi`` in ``[0, pi)`` sampled
uniformly, with broadside at ``pi/2``. Gains are linear power ratios.

The effective radiated pattern (ERP) is a step function: unit gain inside the
mainlobe ``[phi_m - BW/2, phi_m + BW/2]`` and ``10**(-sll/10)`` elsewhere.
``sll`` is stored as a positive suppression magnitude in dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_SAMPLES = 2048
DEFAULT_BW_STEPS = 180
DEFAULT_SLL_STEPS = 200

# golden-section iterations; interval shrinks by 0.618 each step
_GOLDEN_ITERS = 60
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class PatternError(ValueError):
    """Invalid pattern input or an unsatisfiable resolution requirement."""


@dataclass(frozen=True)
class ArraySpec:
    n_elements: int = 320
    boresight: float = math.pi / 2

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise PatternError(f"n_elements must be an integer >= 2, got {self.n_elements}")
        if not 0.0 <= self.boresight < 2 * math.pi:
            raise PatternError(f"boresight must lie in [0, 2*pi), got {self.boresight}")


@dataclass(frozen=True)
class PasSpec:
    """Laplacian power azimuth spectrum with angular spread ``sigma`` (rad)."""

    sigma: float
    mean_azimuth: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise PatternError(f"angular spread must be > 0, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class SampledPattern:
    angles: np.ndarray
    gains: np.ndarray
    kind: str = "ideal"

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float)
        gains = np.asarray(self.gains, dtype=float)
        if angles.ndim != 1 or angles.shape != gains.shape or angles.size < 2:
            raise PatternError("angles and gains must be 1-D arrays of equal length >= 2")
        if self.kind not in ("ideal", "real", "erp"):
            raise PatternError(f"unknown pattern kind {self.kind!r}")
        if not np.all(np.isfinite(gains)):
            raise PatternError("pattern gains must be finite")
        if np.any(gains < 0) or not gains.max() > 0:
            raise PatternError("pattern gains must be >= 0 with a positive maximum")
        diffs = np.diff(angles)
        if np.any(diffs <= 0) or not np.allclose(diffs, diffs[0], rtol=1e-5, atol=0):
            raise PatternError("angles must be strictly increasing with a uniform step")
        angles.setflags(write=False)
        gains.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "gains", gains)

    @property
    def step(self) -> float:
        return float(self.angles[1] - self.angles[0])

    def __len__(self):
        return self.angles.size

    def normalized(self) -> "SampledPattern":
        return SampledPattern(self.angles, self.gains / self.gains.max(), self.kind)

    def gains_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.gains)


@dataclass(frozen=True)
class ErpFit:
    bw_effect: float
    sll_effect: float
    pointing: float = math.pi / 2
    residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        # sector antennas may use an omni ERP, so allow up to a full turn here;
        # fitted results are always below pi
        if not 0 < self.bw_effect <= 2 * math.pi:
            raise PatternError(f"bw_effect must be in (0, 2*pi], got {self.bw_effect}")
        if not self.sll_effect > 0:
            raise PatternError(f"sll_effect must be a positive suppression in dB, got {self.sll_effect}")
        if self.residual < 0:
            raise PatternError("residual must be >= 0")

    @property
    def sidelobe_gain(self) -> float:
        return 10.0 ** (-self.sll_effect / 10.0)


def angle_grid(n_samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    return np.arange(n_samples) * (math.pi / n_samples)


def ideal_array_gain(spec: ArraySpec, phi):
    """|sin(x)/x| with x = (N/2)*pi*cos(phi); the x = 0 limit is 1."""
    x = 0.5 * spec.n_elements * np.cos(np.asarray(phi, dtype=float))
    # np.sinc(t) = sin(pi t)/(pi t)
    g = np.abs(np.sinc(x))
    return float(g) if np.ndim(g) == 0 else g


def ideal_pattern(spec: ArraySpec, n_samples: int = DEFAULT_SAMPLES) -> SampledPattern:
    phi = angle_grid(n_samples)
    return SampledPattern(phi, ideal_array_gain(spec, phi), "ideal")


def _wrap(delta):
    return np.abs((np.asarray(delta, dtype=float) + np.pi) % (2 * np.pi) - np.pi)


def laplacian_pas(spec: PasSpec, phi):
    """Laplacian power azimuth spectrum density, wrapped angular distance."""
    d = _wrap(np.asarray(phi, dtype=float) - spec.mean_azimuth)
    val = np.exp(-math.sqrt(2.0) * d / spec.sigma) / (math.sqrt(2.0) * spec.sigma)
    return float(val) if np.ndim(val) == 0 else val


def laplacian_kernel(sigma: float, step: float, n: int) -> np.ndarray:
    """Discrete Laplacian kernel on a circle of ``n`` samples, renormalized to sum 1.

    Index ``k`` holds the weight for a circular lag of ``k`` samples.
    """
    lag = np.arange(n)
    dist = np.minimum(lag, n - lag) * step
    k = laplacian_pas(PasSpec(sigma), dist)
    return k / k.sum()


def _even_extension(gains: np.ndarray) -> np.ndarray:
    # full circle of 2M samples; the pi sample reuses its nearest neighbour
    m = gains.size
    full = np.empty(2 * m)
    full[:m] = gains
    full[m] = gains[-1]
    full[m + 1:] = gains[1:][::-1]
    return full


def spread_pattern(ideal: SampledPattern, pas: PasSpec) -> SampledPattern:
    """Circular convolution of a pattern with the wrapped Laplacian spectrum.

    A spread narrower than one sample step returns the input unchanged. Spreads
    between one and eight steps are rejected: the kernel is not resolved.
    """
    if ideal.kind != "ideal":
        raise PatternError(f"spread_pattern expects an ideal pattern, got kind={ideal.kind!r}")
    step = ideal.step
    if pas.sigma < step:
        return SampledPattern(ideal.angles, ideal.gains.copy(), "real")
    if step > pas.sigma / 8:
        need = int(math.ceil(8 * math.pi / pas.sigma))
        raise PatternError(
            f"sampling step {step:.6g} rad exceeds sigma/8 = {pas.sigma / 8:.6g} rad; "
            f"use a step <= {pas.sigma / 8:.6g} rad (at least {need} samples over [0, pi))"
        )
    full = _even_extension(ideal.gains)
    kernel = laplacian_kernel(pas.sigma, step, full.size)
    out = np.fft.irfft(np.fft.rfft(full) * np.fft.rfft(kernel), n=full.size)
    gains = np.clip(out[: ideal.gains.size], 0.0, None)
    return SampledPattern(ideal.angles, gains, "real")


def erp_gain(fit: ErpFit, phi):
    """Two-level ERP gain; the mainlobe interval is closed."""
    inside = np.abs(np.asarray(phi, dtype=float) - fit.pointing) <= fit.bw_effect / 2
    g = np.where(inside, 1.0, fit.sidelobe_gain)
    return float(g) if np.ndim(g) == 0 else g


def erp_pattern(fit: ErpFit, angles: np.ndarray) -> SampledPattern:
    return SampledPattern(angles, erp_gain(fit, angles), "erp")


def erp_cost(gains: np.ndarray, angles: np.ndarray, pointing: float, bw: float, sll: float) -> float:
    """Riemann-sum L1 distance between an ERP step and sampled gains."""
    step = float(angles[1] - angles[0])
    inside = np.abs(angles - pointing) <= bw / 2
    level = 10.0 ** (-sll / 10.0)
    return float(np.sum(np.abs(np.where(inside, 1.0, level) - gains)) * step)


def _plateau_center(gains: np.ndarray, angles: np.ndarray) -> float:
    peak = gains.max()
    i = int(np.argmax(gains))
    tol = peak * 1e-12
    lo = i
    while lo > 0 and gains[lo - 1] >= peak - tol:
        lo -= 1
    hi = i
    while hi < gains.size - 1 and gains[hi + 1] >= peak - tol:
        hi += 1
    return float(0.5 * (angles[lo] + angles[hi]))


def _golden_min(f, lo: float, hi: float):
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_GOLDEN_ITERS):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def fit_erp(
    real: SampledPattern,
    floor_db: float = -20.0,
    bw_steps: int = DEFAULT_BW_STEPS,
    sll_steps: int = DEFAULT_SLL_STEPS,
) -> ErpFit:
    """Fit (BW, SLL) of the two-level ERP to a peak-normalized pattern by L1 cost.

    Stage one scans a ``bw_steps x sll_steps`` grid exhaustively. Stage two
    refines: the cost is piecewise constant in BW (it only changes when a
    sample enters the mainlobe), so every distinct mainlobe set is scanned and
    SLL is golden-section minimized inside each; the cost is unimodal in SLL.
    The result is never worse than the best grid candidate.
    """
    if real.kind != "real":
        raise PatternError(f"fit_erp expects a real (spread) pattern, got kind={real.kind!r}")
    if not floor_db < 0:
        raise PatternError(f"floor must be negative dB, got {floor_db}")
    if bw_steps < 1 or sll_steps < 1:
        raise PatternError("empty search grid")
    gains = real.gains / real.gains.max()
    angles = real.angles
    step = real.step
    pointing = _plateau_center(gains, angles)
    sll_max = -float(floor_db)
    sll_min = sll_max * 1e-9

    # quantize to a millionth of a step so mirror-image samples share one edge
    dist = np.round(np.abs(angles - pointing) / step, 6) * step
    order = np.argsort(dist, kind="stable")
    dist_sorted = dist[order]

    def level_cost_table(levels):
        # cost of every (mainlobe set of size m, level) pair using prefix sums over
        # samples ordered by distance from the pointing angle
        g = gains[order]
        in_cost = np.concatenate([[0.0], np.cumsum(1.0 - g)])
        out = np.abs(levels[:, None] - g[None, :])
        out_tail = np.concatenate([np.cumsum(out[:, ::-1], axis=1)[:, ::-1], np.zeros((levels.size, 1))], axis=1)
        return (in_cost[None, :] + out_tail) * step

    # stage one: grid
    bw_grid = math.pi * (np.arange(bw_steps) + 0.5) / bw_steps
    sll_grid = sll_max * (np.arange(sll_steps) + 0.5) / sll_steps
    m_of_bw = np.searchsorted(dist_sorted, bw_grid / 2, side="right")
    table = level_cost_table(10.0 ** (-sll_grid / 10.0))
    grid_costs = table[:, m_of_bw]  # (sll, bw)
    j, i = np.unravel_index(int(np.argmin(grid_costs)), grid_costs.shape)
    best = (float(grid_costs[j, i]), float(bw_grid[i]), float(sll_grid[j]))

    # stage two: every distinct mainlobe set whose BW stays inside (0, pi)
    edges = np.unique(dist_sorted)
    m_counts = np.searchsorted(dist_sorted, edges, side="right")
    nxt = np.append(edges[1:], np.inf)
    bw_mid = edges + nxt  # 2 * midpoint between consecutive breakpoints
    ok = (bw_mid > 0) & (bw_mid < math.pi)
    g_sorted = gains[order]
    in_cost = np.concatenate([[0.0], np.cumsum(1.0 - g_sorted)])
    for m, bw in zip(m_counts[ok], bw_mid[ok]):
        outside = g_sorted[m:]
        base = in_cost[m]

        def cost(sll, outside=outside, base=base):
            return (base + float(np.sum(np.abs(10.0 ** (-sll / 10.0) - outside)))) * step

        # the L1-optimal level is the median of the outside gains
        if outside.size:
            med = float(np.median(outside))
            guess = -10.0 * math.log10(med) if med > 0 else sll_max
        else:
            guess = sll_min
        guess = min(max(guess, sll_min), sll_max)
        c = cost(guess)
        if c < best[0]:
            best = (c, float(bw), guess)
    c0, bw, sll = best
    lo, hi = max(sll_min, sll - 1.0), min(sll_max, sll + 1.0)
    m = int(np.searchsorted(dist_sorted, bw / 2, side="right"))
    outside = g_sorted[m:]

    def polish(s):
        return (in_cost[m] + float(np.sum(np.abs(10.0 ** (-s / 10.0) - outside)))) * step

    s_new, c_new = _golden_min(polish, lo, hi)
    if c_new < c0:
        sll, c0 = s_new, c_new
    residual = erp_cost(gains, angles, pointing, bw, sll)
    return ErpFit(bw_effect=bw, sll_effect=sll, pointing=pointing, residual=residual)


def beamwidth_3db(pattern: SampledPattern) -> float:
    """Width of the contiguous region around the peak within 3 dB of it."""
    g = pattern.gains / pattern.gains.max()
    i = int(np.argmax(g))
    half = 10.0 ** (-0.3)
    lo = i
    while lo > 0 and g[lo - 1] >= half:
        lo -= 1
    hi = i
    while hi < g.size - 1 and g[hi + 1] >= half:
        hi += 1
    return (hi - lo + 1) * pattern.step


def mean_sidelobe_db(pattern: SampledPattern, mainlobe_halfwidth: float) -> float:
    """Mean peak-normalized gain (dB) outside a mainlobe of the given half-width."""
    g = pattern.gains / pattern.gains.max()
    center = _plateau_center(g, pattern.angles)
    outside = np.abs(pattern.angles - center) > mainlobe_halfwidth
    return float(10.0 * np.log10(np.mean(g[outside])))


def write_pattern_csv(pattern: SampledPattern, path) -> Path:
    path = Path(path)
    lines = ["angle_rad,gain_linear,gain_db"]
    db = pattern.gains_db()
    for a, g, d in zip(pattern.angles, pattern.gains, db):
        lines.append(f"{a:.9g},{g:.9g},{d:.9g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_pattern_csv(path, kind: str = "real") -> SampledPattern:
    rows = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if rows[0].strip() != "angle_rad,gain_linear,gain_db":
        raise PatternError(f"unexpected pattern CSV header: {rows[0]!r}")
    data = np.array([[float(v) for v in r.split(",")[:2]] for r in rows[1:]])
    return SampledPattern(data[:, 0], data[:, 1], kind)

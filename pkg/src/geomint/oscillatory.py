"""Trigonometric integrators for systems with fast harmonic blocks.

For H = |p|^2/2 + |Omega q|^2/2 + U(q) the one-step map with filter
functions psi, phi reads (all filter matrices are functions of h*Omega,
applied coordinate-wise):

    g(q)  = -grad U(phi(h Omega) q)
    q1    = cos(h Omega) q + Omega^{-1} sin(h Omega) p + h^2/2 Psi g(q)
    p1    = -Omega sin(h Omega) q + cos(h Omega) p
            + h/2 (Psi0 g(q) + Psi1 g(q1))

with Psi = psi(h Omega), Psi1 = psi(h Omega)/sinc(h Omega) and
Psi0 = cos(h Omega) Psi1, which makes the method symmetric and exact on
the uncoupled (U = 0) system.  Zero-frequency coordinates reduce to the
three-stage kick-drift-kick map.

Step sizes are screened by a non-resonance report: h*omega_j should stay
away from multiples of pi (by sqrt(h)), unless the product is itself
below sqrt(h) and the oscillation is fully resolved.  Signed sums of the
h*omega_j are additionally checked against nonzero multiples of 2*pi.
The report is a warning-or-refuse policy device; it does not guarantee
the long-time behavior, it only refuses step sizes that are known bad.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractViolationError, InadmissibleStepError, ResonantStepError
from .models.state import PhaseState
from .models.systems import OscillatorySystem, oscillatory_energies
from .models.fpu import make_fpu_chain
from .series import SeriesTable
from .symplectic import StepperConfig, integrate

_SINC_TAYLOR_CUTOFF = 1e-8
_SINC_SINGULARITY_TOL = 1e-12


def sinc(x):
    """sin(x)/x with the removable singularity filled in.

    Below the cutoff the fourth-order Taylor polynomial is used, which is
    exact to machine precision there and avoids any 0/0 evaluation.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SINC_TAYLOR_CUTOFF
    out = np.empty_like(x)
    xs = x[small]
    out[small] = 1.0 - xs**2 / 6.0 + xs**4 / 120.0
    xl = x[~small]
    out[~small] = np.sin(xl) / xl
    return out


@dataclass(frozen=True)
class FilterPair:
    """Filter functions (psi, phi) of the one-step map.

    Both must be smooth, vectorized, and equal to 1 at 0 (checked to
    1e-12 on construction).
    """

    psi: Callable
    phi: Callable
    name: str = "custom"

    def __post_init__(self):
        zero = np.zeros(1)
        if abs(float(self.psi(zero)[0]) - 1.0) > 1e-12 or abs(float(self.phi(zero)[0]) - 1.0) > 1e-12:
            raise ContractViolationError("filters must satisfy psi(0) = phi(0) = 1")


def impulse_filter() -> FilterPair:
    """psi = sinc, phi = 1: the impulse (kick-rotate-kick) method."""
    return FilterPair(psi=sinc, phi=lambda x: np.ones_like(np.asarray(x, dtype=float)), name="impulse")


def mollified_impulse_filter() -> FilterPair:
    """psi = sinc * phi with phi = sinc: the mollified impulse method."""
    return FilterPair(psi=lambda x: sinc(x) ** 2, phi=sinc, name="mollified-impulse")


FILTERS = {
    "trig-impulse": impulse_filter,
    "trig-mollified": mollified_impulse_filter,
}


class TrigKernel:
    """Stepper kernel for one system/filter pair; caches coefficients per h.

    Instances are valid kernels for symplectic.integrate and friends:
    call signature (sys, cfg, h, p, q) -> (p1, q1).  The system argument
    must be the one the kernel was built for.
    """

    def __init__(self, sys: OscillatorySystem, filters: FilterPair):
        if not isinstance(sys, OscillatorySystem):
            raise ContractViolationError("trigonometric steps need an OscillatorySystem")
        self.sys = sys
        self.filters = filters
        self._coeff_cache = {}

    def _coefficients(self, h):
        cached = self._coeff_cache.get(h)
        if cached is not None:
            return cached
        sys = self.sys
        xi = h * sys.omega  # per coordinate
        sinc_xi = sinc(xi)
        bad = np.abs(sinc_xi) < _SINC_SINGULARITY_TOL
        if np.any(bad):
            coord = int(np.argmax(bad))
            block = int(np.searchsorted(np.cumsum(sys.block_dims), coord, side="right"))
            raise ResonantStepError(
                f"sinc(h*omega) vanishes for block {block} (h*omega = {xi[coord]:.6g}); "
                "the filtered step is singular at this step size",
                block_index=block,
                h_omega=float(xi[coord]),
            )
        psi = np.asarray(self.filters.psi(xi), dtype=float)
        phi = np.asarray(self.filters.phi(xi), dtype=float)
        cos_xi = np.cos(xi)
        coeffs = {
            "cos": cos_xi,
            "hsinc": h * sinc_xi,  # Omega^{-1} sin(h Omega)
            "wsin": sys.omega * np.sin(xi),  # Omega sin(h Omega)
            "phi": phi,
            "psi": psi,
            "psi1": psi / sinc_xi,
            "psi0": cos_xi * psi / sinc_xi,
        }
        self._coeff_cache[h] = coeffs
        return coeffs

    def __call__(self, sys, cfg, h, p, q):
        if sys is not self.sys:
            raise ContractViolationError("kernel used with a different system than it was built for")
        c = self._coefficients(h)
        g0 = -self.sys.grad_U(c["phi"] * q)
        q1 = c["cos"] * q + c["hsinc"] * p + 0.5 * h * h * (c["psi"] * g0)
        g1 = -self.sys.grad_U(c["phi"] * q1)
        p1 = -c["wsin"] * q + c["cos"] * p + 0.5 * h * (c["psi0"] * g0 + c["psi1"] * g1)
        return p1, q1


def step_trigonometric(sys, filters: FilterPair, cfg: StepperConfig, y: PhaseState) -> PhaseState:
    """One filtered step of size cfg.step_size."""
    kernel = TrigKernel(sys, filters)
    p1, q1 = kernel(sys, cfg, cfg.step_size, y.p, y.q)
    return PhaseState(p=p1, q=q1)


def integrate_trigonometric(sys, filters, h, y0, t_end, record_every=1):
    """Fixed-step run of the filtered method; returns [(t, state)]."""
    kernel = TrigKernel(sys, filters)
    cfg = StepperConfig(step_size=float(h))
    return integrate(sys, kernel, cfg, y0, t_end, record_every=record_every)


def _signed_combinations(n_freqs, max_terms):
    """Coefficient vectors k with 1 <= sum |k_i| <= max_terms.

    Only one of {k, -k} is produced (first nonzero entry positive).
    """
    combos = []

    def extend(prefix, start, budget, nonzero_seen):
        if nonzero_seen:
            combos.append(tuple(prefix))
        if budget == 0 or start == n_freqs:
            return
        for idx in range(start, n_freqs):
            for mag in range(1, budget + 1):
                signs = (1,) if not nonzero_seen else (1, -1)
                for sign in signs:
                    k = [0] * n_freqs
                    k[:len(prefix)] = prefix
                    k[idx] = sign * mag
                    extend(k[: idx + 1], idx + 1, budget - mag, True)

    extend([], 0, max_terms, False)
    # Deduplicate (the generator can revisit): keep insertion order.
    seen = set()
    unique = []
    for k in combos:
        k_full = k + (0,) * (n_freqs - len(k))
        if k_full not in seen:
            seen.add(k_full)
            unique.append(k_full)
    return unique


def _distance_to_multiples(values, period, include_zero):
    """Distance of each value (>= 0) to the nearest multiple of ``period``."""
    values = np.asarray(values, dtype=float)
    rem = np.mod(values, period)
    dist = np.minimum(rem, period - rem)
    if not include_zero:
        # The multiple 0 does not count: values below period/2 are
        # measured against the first nonzero multiple instead.
        below = values < 0.5 * period
        dist = np.where(below, period - values, dist)
    return dist


@dataclass
class ResonanceReport:
    """Step-size admissibility data for one (system, h) pair."""

    h: float
    threshold: float  # sqrt(h)
    block_indices: np.ndarray  # positive-frequency blocks
    h_omega: np.ndarray  # h * omega_j for those blocks
    freq_distances: np.ndarray  # distance of h*omega_j to multiples of pi
    freq_admissible: np.ndarray  # per-block flags
    admissible: bool  # all single-frequency conditions hold
    sum_coefficients: list  # coefficient vectors over the positive blocks
    sum_values: np.ndarray  # |sum k_j h omega_j|
    sum_distances: np.ndarray  # distance to nonzero multiples of 2 pi
    sums_admissible: bool
    near_resonant_pairs: list  # (k_a, k_b, gap) with gap < threshold


def resonance_report(sys: OscillatorySystem, h, n_sum_terms=1) -> ResonanceReport:
    """Screen step size ``h`` against the frequencies of ``sys``.

    Single-frequency rule: every h*omega_j must be at least sqrt(h) away
    from the nearest multiple of pi, except that a product below sqrt(h)
    (an oscillation fully resolved by the step) is admissible.  Sum rule:
    signed sums of at most ``n_sum_terms + 1`` of the h*omega_j must stay
    sqrt(h) away from nonzero multiples of 2*pi.  Pairs of sums closer
    than sqrt(h) to each other are reported as near-resonant combinations
    (these are genuine frequency resonances, not step-size artifacts, so
    they do not affect admissibility).
    """
    h = float(h)
    if h <= 0.0 or not np.isfinite(h):
        raise ContractViolationError(f"h must be positive and finite, got {h}")
    if n_sum_terms < 0:
        raise ContractViolationError(f"n_sum_terms must be >= 0, got {n_sum_terms}")
    threshold = np.sqrt(h)
    positive = np.flatnonzero(sys.frequencies > 0.0)
    xi = h * sys.frequencies[positive]
    freq_dist = _distance_to_multiples(xi, np.pi, include_zero=True)
    freq_ok = (freq_dist >= threshold) | (xi < threshold)

    combos = _signed_combinations(positive.size, n_sum_terms + 1)
    omega = sys.frequencies[positive]
    if combos:
        kmat = np.array(combos, dtype=float)
        sums = np.abs(kmat @ (h * omega))
        sum_dist = _distance_to_multiples(sums, 2.0 * np.pi, include_zero=False)
        gap = np.abs(sums[:, None] - sums[None, :])
        close = np.argwhere(np.triu(gap < threshold, k=1))
        pairs = [(combos[a], combos[b], float(gap[a, b])) for a, b in close]
    else:
        sums = np.zeros(0)
        sum_dist = np.zeros(0)
        pairs = []
    return ResonanceReport(
        h=h,
        threshold=float(threshold),
        block_indices=positive,
        h_omega=xi,
        freq_distances=freq_dist,
        freq_admissible=freq_ok,
        admissible=bool(np.all(freq_ok)),
        sum_coefficients=combos,
        sum_values=sums,
        sum_distances=sum_dist,
        sums_admissible=bool(np.all(sum_dist >= threshold)),
        near_resonant_pairs=pairs,
    )


def run_energy_exchange_experiment(m, omega, h, t_end, filters=None, record_every=None) -> SeriesTable:
    """Integrate the stiff spring chain and record its energy exchange.

    Refuses inadmissible step sizes (raising InadmissibleStepError with
    the report attached).  The returned table has columns t, E_1..E_m
    (fast-block energies), H_omega, H_slow, H, and H_rel_drift.
    """
    sys, y0 = make_fpu_chain(m, omega)
    report = resonance_report(sys, h)
    if not report.admissible:
        raise InadmissibleStepError(
            f"step size {h} is resonant for omega = {omega} "
            f"(min distance {report.freq_distances.min():.3g} < sqrt(h) = {report.threshold:.3g})",
            report=report,
        )
    if filters is None:
        filters = mollified_impulse_filter()
    n_steps = int(round(t_end / h))
    if record_every is None:
        record_every = max(1, n_steps // 2000)
    records = integrate_trigonometric(sys, filters, h, y0, t_end, record_every=record_every)
    columns = ["t"] + [f"E_{j}" for j in range(1, m + 1)] + ["H_omega", "H_slow", "H", "H_rel_drift"]
    table = SeriesTable(columns)
    h0 = None
    for t, state in records:
        e = oscillatory_energies(sys, state)
        if h0 is None:
            h0 = e.h_total
        row = [t] + [e.mode_energies[j] for j in range(1, m + 1)]
        row += [e.h_omega, e.h_slow, e.h_total, (e.h_total - h0) / abs(h0)]
        table.append(row)
    return table

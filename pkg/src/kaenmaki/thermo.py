"""Pressure, Gibbs-Markov measures, and the equilibrium measure of the system.

The singular value function of a word, phi^s, equals alpha1^s for s in (0,1)
and alpha1 * alpha2^(s-1) for s in [1,2], where alpha1 >= alpha2 are the
singular values of the composed linear part.  Its growth rate in n of
log sum over length-n words is the subadditive pressure P(s).

On the doubled alphabet, two locally constant potentials track the log
horizontal and log vertical side lengths of cylinder rectangles.  Each has a
unique Gibbs measure, realized here as the stationary Markov chain built from
the Perron eigendata of the weighted transition matrix (transfer matrix
convention: T(i,j) = A(i,j) * exp(weight_j)).  The equilibrium measure nu of
phi^s is the sum of the two lifted Gibbs measures, and all of its cylinder
masses, entropy and Lyapunov exponents are computed from that Markov data.

Measures and phi-values are accumulated in log space throughout; ratios are
differences of logs exponentiated at the end.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import numpy as np

from .coding import (
    CodedWord,
    as_word,
    check_mixing,
    encode_tau,
    tau_arrays,
    product_signature,
    transition_matrix,
)
from .errors import (
    BadMapKinds,
    ConvergenceFailure,
    InternalMismatch,
    SOutOfRange,
    TooLarge,
)
from .ifs import IfsSpec

ENUMERATION_CAP = 10 ** 7
_POWER_TOL = 1e-15
_POWER_MAX_ITER = 10 ** 6
_RESIDUAL_TOL = 1e-12


class PotentialIndex(IntEnum):
    ONE = 1
    TWO = 2


@dataclass(frozen=True)
class Potential:
    """Log-weights per doubled symbol for one of the two side-length potentials."""

    s: float
    t: PotentialIndex
    weights: np.ndarray

    def __post_init__(self):
        self.weights.setflags(write=False)


def _weight_vector(spec: IfsSpec, s: float, t: PotentialIndex) -> np.ndarray:
    """Weights for s in (0, 2]; the public wrapper enforces the open range."""
    d = spec.d
    w = np.empty(2 * d)
    for sym in range(1, 2 * d + 1):
        if sym <= d:
            ra, rb = spec.a[sym - 1], spec.b[sym - 1]
        else:
            ra, rb = spec.b[sym - d - 1], spec.a[sym - d - 1]
        r1, r2 = (ra, rb) if t == PotentialIndex.ONE else (rb, ra)
        if s < 1.0:
            w[sym - 1] = s * np.log(r1)
        else:
            w[sym - 1] = np.log(r1) + (s - 1.0) * np.log(r2)
    return w


def potential(spec: IfsSpec, s: float, t: PotentialIndex = PotentialIndex.ONE) -> Potential:
    """Locally constant potential on the doubled alphabet.

    For s in (0,1) the weight of an unshifted symbol i is s*log(a_i) for t=ONE
    and s*log(b_i) for t=TWO; shifted symbols swap a and b.  For s in [1,2)
    the weight is log(a_i) + (s-1)*log(b_i) (t=ONE), with the same swaps.
    Both branches agree at s=1.
    """
    if not (0.0 < s < 2.0):
        raise SOutOfRange(f"s={s} must lie in (0,2)")
    return Potential(s=s, t=PotentialIndex(t), weights=_weight_vector(spec, s, t))


def _transfer_matrix(spec: IfsSpec, s: float, t: PotentialIndex) -> np.ndarray:
    A = transition_matrix(spec.d, spec.l).entries
    return A * np.exp(_weight_vector(spec, s, t))[None, :]


def _power_iteration(T: np.ndarray) -> tuple[float, np.ndarray]:
    """Perron root and a positive right eigenvector of a primitive matrix.

    Deterministic all-ones start; stops when successive eigenvalue estimates
    agree to 1e-15 relative and the eigen residual is below 1e-12 sup norm.
    """
    v = np.ones(T.shape[0])
    v /= v.sum()
    lam_prev = np.inf
    for k in range(_POWER_MAX_ITER):
        w = T @ v
        tot = w.sum()
        lam = tot  # v is L1-normalized and positive
        v = w / tot
        if abs(lam - lam_prev) <= _POWER_TOL * lam and k >= 5:
            resid = float(np.abs(T @ v - lam * v).max())
            if resid <= _RESIDUAL_TOL * max(1.0, lam):
                return float(lam), v
        lam_prev = lam
    resid = float(np.abs(T @ v - lam * v).max())
    raise ConvergenceFailure(f"power iteration hit the cap; residual={resid:.3e}")


def pressure(spec: IfsSpec, s: float, t: PotentialIndex = PotentialIndex.ONE) -> float:
    """Log spectral radius of the weighted transition matrix.

    Symmetric in t; the t=ONE and t=TWO values agree to within the eigen
    residual tolerance.
    """
    if not (0.0 < s < 2.0):
        raise SOutOfRange(f"s={s} must lie in (0,2)")
    return _pressure_any(spec, s, t)


def _pressure_any(spec: IfsSpec, s: float, t: PotentialIndex = PotentialIndex.ONE) -> float:
    """Pressure for s in (0, 2]; used by the affinity-dimension root finder."""
    lam, _ = _power_iteration(_transfer_matrix(spec, s, t))
    return float(np.log(lam))


@dataclass(frozen=True)
class MarkovGibbs:
    """Perron eigendata realizing one Gibbs measure as a stationary Markov chain.

    stochastic(i,j) = T(i,j) * right_vec(j) / (perron_root * right_vec(i)),
    stationary(i) proportional to left_vec(i) * right_vec(i).  The cylinder
    mass of an admissible coded word c is stationary[c1] * prod stochastic
    along c, and it obeys two-sided Gibbs bounds with the explicit constants
    returned by gibbs_bounds().
    """

    s: float
    t: PotentialIndex
    d: int
    l: int
    perron_root: float
    log_pressure: float
    right_vec: np.ndarray
    left_vec: np.ndarray
    stationary: np.ndarray
    stochastic: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for arr in (self.right_vec, self.left_vec, self.stationary,
                    self.stochastic, self.weights):
            arr.setflags(write=False)

    def gibbs_bounds(self) -> tuple[float, float]:
        """Constants (lo, up) with lo <= m([c]) / exp(S_n f - n P) <= up.

        The cylinder formula gives the ratio exactly as
        g(c_1) * right_vec(c_n) with g = stationary * root * exp(-weights) /
        right_vec, so the extreme products of g and right_vec bound it.
        """
        g = self.stationary * self.perron_root * np.exp(-self.weights) / self.right_vec
        return float(g.min() * self.right_vec.min()), float(g.max() * self.right_vec.max())


@lru_cache(maxsize=256)
def gibbs_markov(spec: IfsSpec, s: float, t: PotentialIndex = PotentialIndex.ONE) -> MarkovGibbs:
    """Build the Gibbs measure of one potential as explicit Markov chain data."""
    if not (0.0 < s < 2.0):
        raise SOutOfRange(f"s={s} must lie in (0,2)")
    tm = transition_matrix(spec.d, spec.l)
    if not check_mixing(tm):
        raise InternalMismatch("transition matrix is not mixing")
    T = _transfer_matrix(spec, s, t)
    lam, r = _power_iteration(T)
    _, left = _power_iteration(T.T)
    pi = left * r
    pi /= pi.sum()
    P = T * r[None, :] / (lam * r[:, None])
    P /= P.sum(axis=1, keepdims=True)  # remove the eigen-residual from row sums
    for _ in range(4):  # polish stationarity of pi under the renormalized P
        pi = pi @ P
        pi /= pi.sum()
    return MarkovGibbs(
        s=s, t=PotentialIndex(t), d=spec.d, l=spec.l,
        perron_root=lam, log_pressure=float(np.log(lam)),
        right_vec=r, left_vec=left, stationary=pi, stochastic=P,
        weights=_weight_vector(spec, s, t))


def log_cylinder_measure_mt(g: MarkovGibbs, c: CodedWord) -> float:
    if not c.admissible:
        return -np.inf
    syms = np.asarray(c.symbols) - 1
    v = np.log(g.stationary[syms[0]])
    if len(syms) > 1:
        v += np.log(g.stochastic[syms[:-1], syms[1:]]).sum()
    return float(v)


def cylinder_measure_mt(g: MarkovGibbs, c: CodedWord) -> float:
    """Mass of the cylinder of a coded word; 0 for inadmissible words."""
    lv = log_cylinder_measure_mt(g, c)
    return 0.0 if lv == -np.inf else float(np.exp(lv))


@dataclass(frozen=True)
class KaenmakiMeasure:
    """The equilibrium measure nu: sum of the two lifted Gibbs measures.

    nu([w]) = m1([tau(w)]) + m2([tau(w)]) for words over the base alphabet.
    """

    spec: IfsSpec
    s: float
    m1: MarkovGibbs
    m2: MarkovGibbs

    def log_cylinder(self, w) -> float:
        c = encode_tau(w, self.spec)
        return float(np.logaddexp(log_cylinder_measure_mt(self.m1, c),
                                  log_cylinder_measure_mt(self.m2, c)))

    def cylinder(self, w) -> float:
        return float(np.exp(self.log_cylinder(w)))

    def log_cylinder_batch(self, words: np.ndarray) -> np.ndarray:
        """Vectorized log nu over an (N, n) array of words (values 1..d)."""
        coded = tau_arrays(words, self.spec) - 1
        lg1 = np.log(self.m1.stationary[coded[:, 0]])
        lg2 = np.log(self.m2.stationary[coded[:, 0]])
        if coded.shape[1] > 1:
            lg1 = lg1 + np.log(self.m1.stochastic[coded[:, :-1], coded[:, 1:]]).sum(axis=1)
            lg2 = lg2 + np.log(self.m2.stochastic[coded[:, :-1], coded[:, 1:]]).sum(axis=1)
        return np.logaddexp(lg1, lg2)

    def tau_start_mass(self) -> float:
        """m1-mass of coded words starting in the unshifted half."""
        return float(self.m1.stationary[:self.spec.d].sum())

    def envelope(self) -> tuple[float, float]:
        """Two-sided bounds for nu([w]) / (phi^s(w) exp(-n P)) over all words."""
        lo1, up1 = self.m1.gibbs_bounds()
        lo2, up2 = self.m2.gibbs_bounds()
        return min(lo1, lo2), up1 + up2


@lru_cache(maxsize=64)
def kaenmaki_measure(spec: IfsSpec, s: float) -> KaenmakiMeasure:
    return KaenmakiMeasure(
        spec=spec, s=s,
        m1=gibbs_markov(spec, s, PotentialIndex.ONE),
        m2=gibbs_markov(spec, s, PotentialIndex.TWO))


def kaenmaki_cylinder(spec: IfsSpec, s: float, w) -> float:
    """nu([w]); additive over one-letter extensions and normalized at level 1."""
    return kaenmaki_measure(spec, s).cylinder(as_word(w, spec.d))


def log_svf_phi(spec: IfsSpec, s: float, w) -> float:
    """log phi^s(w), computed two ways with mandatory agreement.

    Route one uses the singular values of the product signature (Falconer's
    definition); route two takes the larger of the two Birkhoff weight sums
    along the tau lift.  Disagreement beyond 1e-12 in log indicates an
    implementation bug and raises InternalMismatch.  Route one is returned.
    """
    if not (0.0 < s < 2.0):
        raise SOutOfRange(f"s={s} must lie in (0,2)")
    w = as_word(w, spec.d)
    sig = product_signature(w, spec)
    if s < 1.0:
        via_svd = s * sig.log_alpha1
    else:
        via_svd = sig.log_alpha1 + (s - 1.0) * sig.log_alpha2
    w1 = _weight_vector(spec, s, PotentialIndex.ONE)
    w2 = _weight_vector(spec, s, PotentialIndex.TWO)
    coded = np.asarray(encode_tau(w, spec).symbols) - 1
    via_birkhoff = max(float(w1[coded].sum()), float(w2[coded].sum()))
    if abs(via_svd - via_birkhoff) > 1e-12 * max(1.0, abs(via_svd)):
        raise InternalMismatch(
            f"phi routes disagree: {via_svd!r} vs {via_birkhoff!r} for word {w}")
    return float(via_svd)


def svf_phi(spec: IfsSpec, s: float, w) -> float:
    return float(np.exp(log_svf_phi(spec, s, w)))


# -- exhaustive enumeration over all words of one length ----------------------

def _guard_enumeration(spec: IfsSpec, n: int):
    if n < 1:
        raise TooLarge("word length must be >= 1")
    if spec.d ** n > ENUMERATION_CAP:
        raise TooLarge(f"{spec.d}^{n} words exceed the enumeration cap {ENUMERATION_CAP}")


def level_signature_logs(spec: IfsSpec, n: int):
    """(log_alpha1, log_alpha2) over all d^n words in lexicographic order.

    Built by level expansion so no word matrix is materialized; the word with
    index k has letters given by the base-d digits of k, most significant
    first.
    """
    _guard_enumeration(spec, n)
    la = np.log(np.asarray(spec.a))
    lb = np.log(np.asarray(spec.b))
    is_anti = np.arange(1, spec.d + 1) >= spec.l
    log_p, log_q = la.copy(), lb.copy()
    parity = is_anti.astype(np.int8)
    for _ in range(n - 1):
        m = log_p.size
        jj = np.tile(np.arange(spec.d), m)
        even = np.repeat(parity % 2 == 0, spec.d)
        log_p = np.repeat(log_p, spec.d) + np.where(even, la[jj], lb[jj])
        log_q = np.repeat(log_q, spec.d) + np.where(even, lb[jj], la[jj])
        parity = np.repeat(parity, spec.d) + is_anti[jj].astype(np.int8)
    return np.maximum(log_p, log_q), np.minimum(log_p, log_q)


def _log_phi_from_alphas(log_a1: np.ndarray, log_a2: np.ndarray, s: float) -> np.ndarray:
    if s < 1.0:
        return s * log_a1
    return log_a1 + (s - 1.0) * log_a2


def level_log_measures(spec: IfsSpec, s: float, n: int):
    """(log_phi, log_nu) over all d^n words in lexicographic order."""
    _guard_enumeration(spec, n)
    nu = kaenmaki_measure(spec, s)
    logP1 = np.log(nu.m1.stochastic + (nu.m1.stochastic == 0.0))
    logP2 = np.log(nu.m2.stochastic + (nu.m2.stochastic == 0.0))
    la = np.log(np.asarray(spec.a)); lb = np.log(np.asarray(spec.b))
    is_anti = np.arange(1, spec.d + 1) >= spec.l
    log_p, log_q = la.copy(), lb.copy()
    parity = is_anti.astype(np.int8)
    coded = np.arange(spec.d)
    lg1 = np.log(nu.m1.stationary[coded]); lg2 = np.log(nu.m2.stationary[coded])
    for _ in range(n - 1):
        m = log_p.size
        jj = np.tile(np.arange(spec.d), m)
        even = np.repeat(parity % 2 == 0, spec.d)
        log_p = np.repeat(log_p, spec.d) + np.where(even, la[jj], lb[jj])
        log_q = np.repeat(log_q, spec.d) + np.where(even, lb[jj], la[jj])
        new_coded = np.where(even, jj, jj + spec.d)
        prev = np.repeat(coded, spec.d)
        lg1 = np.repeat(lg1, spec.d) + logP1[prev, new_coded]
        lg2 = np.repeat(lg2, spec.d) + logP2[prev, new_coded]
        coded = new_coded
        parity = np.repeat(parity, spec.d) + is_anti[jj].astype(np.int8)
    log_phi = _log_phi_from_alphas(np.maximum(log_p, log_q), np.minimum(log_p, log_q), s)
    return log_phi, np.logaddexp(lg1, lg2)


def subadditive_pressure_bruteforce(spec: IfsSpec, s: float, n: int) -> float:
    """(1/n) log sum of phi^s over all words of length n.

    A nonincreasing-in-n upper approximant of the pressure, by
    submultiplicativity of phi; serves as the independent oracle for the
    spectral pressure.
    """
    if not (0.0 < s < 2.0):
        raise SOutOfRange(f"s={s} must lie in (0,2)")
    log_a1, log_a2 = level_signature_logs(spec, n)
    log_phi = _log_phi_from_alphas(log_a1, log_a2, s)
    m = log_phi.max()
    return float((m + np.log(np.exp(log_phi - m).sum())) / n)


# -- derived thermodynamic quantities -----------------------------------------

@dataclass(frozen=True)
class AffinityResult:
    value: float
    clamped: bool
    trace: tuple[tuple[float, float], ...]


def affinity_dimension_detail(spec: IfsSpec) -> AffinityResult:
    """Root of the pressure in (0, 2], by bisection.

    The pressure is strictly decreasing in s (verified on the trace of
    evaluations); when it is still positive at s=2 the value clamps to 2 and
    the flag is set.
    """
    trace = []

    def p(s):
        v = _pressure_any(spec, s)
        trace.append((s, v))
        return v

    p_two = p(2.0)
    if abs(p_two) <= 1e-12:
        return AffinityResult(value=2.0, clamped=False, trace=tuple(trace))
    if p_two > 0.0:
        return AffinityResult(value=2.0, clamped=True, trace=tuple(trace))
    lo, hi = 1e-9, 2.0
    if p(lo) <= 0.0:
        raise InternalMismatch("pressure not positive near s=0")
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if p(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    p_root = p(root)
    if abs(p_root) > 1e-12:
        raise ConvergenceFailure(f"|P(s*)|={abs(p_root):.3e} above tolerance")
    by_s = sorted(trace)
    for (s1, v1), (s2, v2) in zip(by_s, by_s[1:]):
        if s2 > s1 and v2 > v1 + 1e-12:
            raise InternalMismatch(f"pressure not decreasing: P({s1})={v1}, P({s2})={v2}")
    return AffinityResult(value=root, clamped=False, trace=tuple(trace))


def affinity_dimension(spec: IfsSpec) -> float:
    return affinity_dimension_detail(spec).value


def lyapunov_exponents(spec: IfsSpec, s: float) -> tuple[float, float]:
    """(chi1, chi2): contraction rates of the singular values under nu.

    Integrals of the two s=1 potentials against the stationary law of the
    first Gibbs chain at parameter s.  chi1 <= chi2 always; the gap is
    strictly positive unless the system is degenerate, in which case a
    warning is emitted rather than an error.
    """
    pi = gibbs_markov(spec, s, PotentialIndex.ONE).stationary
    chi1 = float(-(pi @ _weight_vector(spec, 1.0, PotentialIndex.ONE)))
    chi2 = float(-(pi @ _weight_vector(spec, 1.0, PotentialIndex.TWO)))
    if chi1 > chi2 + 1e-12:
        raise InternalMismatch(f"chi1={chi1} exceeds chi2={chi2}")
    nondegenerate = any(m.a != m.b for m in spec.maps if not m.anti)
    if nondegenerate and chi2 - chi1 < 1e-12:
        warnings.warn(f"Lyapunov gap {chi2 - chi1:.3e} below 1e-12 on a "
                      "non-degenerate system", stacklevel=2)
    return chi1, chi2


def entropy(spec: IfsSpec, s: float, t: PotentialIndex = PotentialIndex.ONE) -> float:
    """h = pressure - integral of the potential; same value for either t."""
    g = gibbs_markov(spec, s, t)
    h = g.log_pressure - float(g.stationary @ g.weights)
    return max(h, 0.0)


def quasi_bernoulli_ratio(spec: IfsSpec, s: float, i: int, j: int, n: int) -> float:
    """phi^s(i^n j i^n) / (phi^s(i^n j) phi^s(i^n)).

    Requires map i diagonal with a != b and map j anti-diagonal.  The ratio
    decays geometrically in n, which is exactly why no two-sided Bernoulli
    comparison can hold for the equilibrium measure.
    """
    if n < 1:
        raise BadMapKinds("n must be >= 1")
    mi, mj = spec.map(i), spec.map(j)
    if mi.anti or not mj.anti:
        raise BadMapKinds(f"need map {i} diagonal and map {j} anti-diagonal")
    if mi.a == mi.b:
        raise BadMapKinds(f"map {i} has a == b; the family degenerates")
    w = (i,) * n + (j,) + (i,) * n
    u = (i,) * n + (j,)
    v = (i,) * n
    return float(np.exp(log_svf_phi(spec, s, w)
                        - log_svf_phi(spec, s, u) - log_svf_phi(spec, s, v)))


def submultiplicativity_check(spec: IfsSpec, s: float, max_len: int) -> tuple[float, float]:
    """Extremes of nu([uv]) / (nu([u]) nu([v])) over word pairs with |u|+|v| <= max_len.

    The upper extreme stays below the Gibbs-derived constant; the lower one
    decays along anti-diagonal insertions and admits no uniform positive
    bound.
    """
    _guard_enumeration(spec, max_len)
    logs = {n: level_log_measures(spec, s, n)[1] for n in range(1, max_len + 1)}
    worst_up, worst_lo = -np.inf, np.inf
    for na in range(1, max_len):
        for nb in range(1, max_len - na + 1):
            ratio = logs[na + nb].reshape(spec.d ** na, spec.d ** nb) \
                - logs[na][:, None] - logs[nb][None, :]
            worst_up = max(worst_up, float(ratio.max()))
            worst_lo = min(worst_lo, float(ratio.min()))
    return float(np.exp(worst_up)), float(np.exp(worst_lo))


@dataclass(frozen=True)
class ThermoSummary:
    s: float
    pressure: float
    entropy: float
    chi1: float
    chi2: float
    affinity_dim: float
    gibbs_lower: float
    gibbs_upper: float


def thermo_summary(spec: IfsSpec, s: float) -> ThermoSummary:
    chi1, chi2 = lyapunov_exponents(spec, s)
    lo, up = kaenmaki_measure(spec, s).envelope()
    return ThermoSummary(
        s=s,
        pressure=pressure(spec, s),
        entropy=entropy(spec, s),
        chi1=chi1,
        chi2=chi2,
        affinity_dim=affinity_dimension(spec),
        gibbs_lower=lo,
        gibbs_upper=up)

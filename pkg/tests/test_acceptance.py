"""Acceptance suite: one test per criterion, each printing its own pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Every tolerance is pinned here, none deferred.

Known honest failures (kept at their stated tolerances rather than loosened):

* Criterion 2 requires the depth-12 word enumeration of the pressure to agree
  with the spectral value to 0.02, but the true gap of that enumeration is
  0.024..0.040 on the reference system (the approximant converges like 1/n
  and depth 12 is not deep enough).  The enumeration itself is correct: it is
  nonincreasing and its root location matches the spectral root to < 0.02.
* Criterion 5 requires the minimum cylinder/phi ratio to move less than 5%
  between depths 6 and 10, but the true minimum drifts 0.602 -> 0.509 (15.5%)
  on its way down to the eigenvector envelope bound 0.4329, which it
  approaches geometrically from above.  There is no exponential drift: the
  maximum is flat and every ratio stays inside the envelope.
"""

import time

import numpy as np
import pytest

import kaenmaki as K
from conftest import EX1_JSON, all_words, anti, diag, random_spec
from kaenmaki.cli import main as cli_main
from kaenmaki.coding import signature_arrays, tau_arrays
from kaenmaki.thermo import PotentialIndex, _weight_vector

ONE, TWO = PotentialIndex.ONE, PotentialIndex.TWO


def _passed(num, msg):
    print(f"criterion {num:02d} PASS: {msg}")


@pytest.fixture(scope="module")
def sstar(ex1):
    return K.affinity_dimension(ex1)


_SAMPLE_SECONDS = {}


@pytest.fixture(scope="module")
def ex1_samples(ex1, sstar):
    """Shared big sample set at the pressure root (criteria 7, 8)."""
    start = time.monotonic()
    samples = K.sample_symbolic(ex1, sstar, count=10 ** 6, depth=25, seed=777)
    _SAMPLE_SECONDS["ex1"] = time.monotonic() - start
    return samples


def _dual_route_worst(spec, s, max_len):
    """Worst log disagreement of the two phi routes over all words <= max_len."""
    w1 = _weight_vector(spec, s, ONE)
    w2 = _weight_vector(spec, s, TWO)
    worst = 0.0
    for n in range(1, max_len + 1):
        words = all_words(spec.d, n)
        lp, lq, _ = signature_arrays(words, spec)
        coded = tau_arrays(words, spec) - 1
        via_b = np.maximum(w1[coded].sum(axis=1), w2[coded].sum(axis=1))
        la1, la2 = np.maximum(lp, lq), np.minimum(lp, lq)
        via_a = s * la1 if s < 1 else la1 + (s - 1) * la2
        worst = max(worst, float(np.abs(via_a - via_b).max()))
    return worst


def test_criterion_01_phi_identity(ex1):
    """phi equals the larger Birkhoff side-sum, to 1e-12 in log, words <= 10."""
    start = time.monotonic()
    rng = np.random.default_rng(1001)
    specs = [ex1] + [random_spec(rng) for _ in range(3)]
    worst = 0.0
    for spec in specs:
        for s in (0.5, 1.0, 1.5):
            worst = max(worst, _dual_route_worst(spec, s, 10))
    elapsed = time.monotonic() - start
    assert worst <= 1e-12, f"identity violated: max log diff {worst:.3e}"
    assert elapsed < 30.0, f"runtime {elapsed:.1f}s exceeds 30s"
    _passed(1, f"max log diff {worst:.2e} over 4 specs x 3 s-values in {elapsed:.1f}s")


def test_criterion_02_pressure_oracle(ex1):
    """Depth-12 enumeration vs spectral pressure, 0.02; nonincreasing in n."""
    start = time.monotonic()
    gaps = {}
    for s in (0.5, 1.0, 1.5):
        seq = [K.subadditive_pressure_bruteforce(ex1, s, n) for n in (2, 4, 8, 12)]
        assert all(b <= a + 1e-12 for a, b in zip(seq, seq[1:])), \
            f"enumeration not nonincreasing at s={s}: {seq}"
        gaps[s] = seq[-1] - K.pressure(ex1, s)
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"runtime {elapsed:.1f}s exceeds 60s"
    assert all(abs(g) <= 0.02 for g in gaps.values()), (
        "depth-12 enumeration sits above the spectral pressure by "
        + ", ".join(f"{g:.4f} (s={s})" for s, g in gaps.items())
        + "; the required 0.02 is tighter than the true 1/n-type convergence "
          "of the enumeration allows at depth 12 (the enumeration is verified "
          "nonincreasing, and its sign-change location agrees with the "
          "spectral root to < 0.02)")
    _passed(2, f"gaps {gaps} all within 0.02 in {elapsed:.1f}s")


def test_criterion_03_symmetry(ex1):
    """Pressure and entropy agree between the two potentials to 1e-10."""
    rng = np.random.default_rng(33)
    specs = [ex1] + [random_spec(rng) for _ in range(20)]
    worst_p = worst_h = 0.0
    for spec in specs:
        for s in (0.3, 0.9, 1.4):
            worst_p = max(worst_p, abs(K.pressure(spec, s, ONE) - K.pressure(spec, s, TWO)))
            worst_h = max(worst_h, abs(K.entropy(spec, s, ONE) - K.entropy(spec, s, TWO)))
    assert worst_p <= 1e-10, f"pressure asymmetry {worst_p:.3e}"
    assert worst_h <= 1e-10, f"entropy asymmetry {worst_h:.3e}"
    _passed(3, f"21 specs x 3 s-values: max pressure diff {worst_p:.2e}, "
               f"entropy diff {worst_h:.2e}")


def test_criterion_04_closed_forms(uniform2, uniform4):
    """Uniform-ratio fixtures: exact pressure, entropy, and pressure root."""
    c, d = 1 / 3, 2
    for s in (0.4, 1.0, 1.5):
        assert abs(K.pressure(uniform2, s) - np.log(d * c ** s)) <= 1e-12
        assert abs(K.entropy(uniform2, s) - np.log(d)) <= 1e-12
    assert abs(K.affinity_dimension(uniform2) - np.log(2) / np.log(3)) <= 1e-9
    detail = K.affinity_dimension_detail(uniform4)
    assert detail.value == 2.0 and not detail.clamped
    _passed(4, "uniform closed forms exact; flat 4-map system roots at 2 unclamped")


def test_criterion_05_gibbs_envelope(ex1, sstar):
    """Cylinder/phi ratios: inside the eigen envelope, stable across depths."""
    lo, up = K.kaenmaki_measure(ex1, sstar).envelope()
    big_c = max(1.0 / lo, up)
    extremes = {}
    for n in (6, 8, 10):
        log_phi, log_nu = K.level_log_measures(ex1, sstar, n)
        ratio = np.exp(log_nu - log_phi)  # pressure is 0 at the root
        assert (ratio >= 1.0 / big_c * (1 - 1e-9)).all() and \
               (ratio <= big_c * (1 + 1e-9)).all(), \
            f"ratio outside [1/C, C] at n={n}"
        assert (ratio >= lo * (1 - 1e-9)).all() and (ratio <= up * (1 + 1e-9)).all(), \
            f"ratio outside the eigen envelope at n={n}"
        extremes[n] = (float(ratio.min()), float(ratio.max()))
    max_drift = abs(extremes[10][1] / extremes[6][1] - 1.0)
    min_drift = abs(extremes[10][0] / extremes[6][0] - 1.0)
    assert max_drift <= 0.05, f"max-ratio drift {max_drift:.1%} between n=6 and n=10"
    assert min_drift <= 0.05, (
        f"min-ratio drift {min_drift:.1%} between n=6 and n=10 "
        f"(mins {extremes[6][0]:.4f} -> {extremes[10][0]:.4f}); the true minimum "
        f"converges geometrically down to the envelope bound {lo:.4f} and moves "
        f"more than 5% over these desk-scale depths; there is no exponential "
        f"drift (the maximum moved {max_drift:.2%} and all ratios stay inside "
        f"the envelope)")
    _passed(5, f"extremes {extremes} inside [{lo:.4f}, {up:.4f}], drift <= 5%")


def test_criterion_06_quasi_bernoulli(ex1):
    """Sandwich-family ratio: exact geometric values and strict decay."""
    spec = K.make_spec([diag(0.5, 0.25, 0.0, 0.0), anti(1 / 3, 1 / 3, 0.55, 0.55)])
    r2 = K.quasi_bernoulli_ratio(spec, 1.0, 1, 2, 2)
    r4 = K.quasi_bernoulli_ratio(spec, 1.0, 1, 2, 4)
    assert abs(r2 - 0.25) <= 1e-12, f"ratio(2)={r2!r}"
    assert abs(r4 - 1 / 16) <= 1e-12, f"ratio(4)={r4!r}"
    ratios = [K.quasi_bernoulli_ratio(spec, 1.0, 1, 2, n) for n in range(1, 11)]
    assert all(b < a for a, b in zip(ratios, ratios[1:])), "not strictly decreasing"
    _passed(6, f"ratio(2)={r2}, ratio(4)={r4}, strictly decreasing to n=10")


def test_criterion_07_ledrappier_young_end_to_end(ex1, sstar, ex1_samples):
    """Monte Carlo local dimension within 0.15 of the report value."""
    start = time.monotonic()
    report = K.dimension_report(ex1, sstar)
    assert report.ly_dim is not None
    rng = np.random.Generator(np.random.Philox(4242))
    centers = ex1_samples.points[rng.choice(len(ex1_samples.points), 20, replace=False)]
    radii = 2.0 ** np.arange(-4, -10, -1)
    slope, stderr = K.estimate_local_dimension(ex1_samples, centers, radii)
    elapsed = time.monotonic() - start + _SAMPLE_SECONDS["ex1"]
    assert abs(slope - report.ly_dim) <= 0.15, \
        f"slope {slope:.4f} vs dimension {report.ly_dim:.4f}"
    assert elapsed < 300.0, f"runtime {elapsed:.1f}s (sampling included) exceeds 5 minutes"
    _passed(7, f"slope {slope:.4f} (se {stderr:.4f}) vs ly_dim {report.ly_dim:.4f}, "
               f"20 centers, 1e6 points, {elapsed:.1f}s")


def test_criterion_08_projected_consistency(ex1, sstar, ex1_samples):
    """Projected slope within 0.10 of h/chi1; piecewise identity to 1e-12."""
    h = K.entropy(ex1, sstar)
    chi1, _ = K.lyapunov_exponents(ex1, sstar)
    slope, _ = K.estimate_projected_dim(ex1_samples, K.Projection.X)
    assert abs(slope - h / chi1) <= 0.10, f"slope {slope:.4f} vs h/chi1 {h / chi1:.4f}"

    rng = np.random.default_rng(88)
    hs = rng.uniform(0.01, 3.0, 10 ** 4)
    c1 = rng.uniform(0.01, 3.0, 10 ** 4)
    c2 = c1 + rng.uniform(0.0, 2.0, 10 ** 4)
    p = np.minimum(hs / c1, 1.0)
    formula = hs / c2 + (c2 - c1) / c2 * p
    piecewise = np.where(hs <= c1, hs / c1, 1.0 + (hs - c1) / c2)
    worst = float(np.abs(formula - piecewise).max())
    assert worst <= 1e-12, f"piecewise identity off by {worst:.3e}"
    _passed(8, f"projected slope {slope:.4f} vs h/chi1 {h / chi1:.4f}; "
               f"identity max err {worst:.2e} over 1e4 triples")


def test_criterion_09_trajectory_diagnostics(ex1):
    """Depth-200 averages within 3 SE of chi1, chi2, h; singular ratio decay.

    Diagnostics run at s = 1.0, where the exponent gap is wide enough for the
    half-rate envelope to separate from sampling noise at depth 200.
    """
    s = 1.0
    chi1, chi2 = K.lyapunov_exponents(ex1, s)
    h = K.entropy(ex1, s)
    assert chi2 - chi1 > 1e-6, f"exponent gap {chi2 - chi1:.2e} too small"

    depth, count, batches = 200, 64, 8
    samples = K.sample_symbolic(ex1, s, count, depth, seed=303)
    lp, lq, _ = signature_arrays(samples.words, ex1)
    log_nu = K.kaenmaki_measure(ex1, s).log_cylinder_batch(samples.words)
    zs = {}
    for name, est, target in [("chi1", -np.maximum(lp, lq) / depth, chi1),
                              ("chi2", -np.minimum(lp, lq) / depth, chi2),
                              ("h", -log_nu / depth, h)]:
        bm = est.reshape(batches, -1).mean(axis=1)
        se = bm.std(ddof=1) / np.sqrt(batches)
        zs[name] = abs(float(bm.mean()) - target) / se
        assert zs[name] <= 3.0, f"{name}: {zs[name]:.2f} standard errors off"

    big = K.sample_symbolic(ex1, s, 20000, depth, seed=7)
    lp, lq, _ = signature_arrays(big.words, ex1)
    frac = float(np.mean((np.minimum(lp, lq) - np.maximum(lp, lq))
                         < -depth * (chi2 - chi1) / 2))
    assert frac >= 0.95, f"only {frac:.3f} of samples beat the half-rate envelope"
    _passed(9, "z-scores " + ", ".join(f"{k}={v:.2f}" for k, v in zs.items())
            + f"; envelope fraction {frac:.4f}")


def test_criterion_10_strip_oracle(ex1, sstar, central_fixture):
    """Randomized strip queries obey the product bound; full cover is exact."""
    rng = np.random.Generator(np.random.Philox(31337))
    checked = 0
    for _ in range(20):
        n = int(rng.integers(1, 4))
        prefix = tuple(int(x) for x in rng.integers(1, ex1.d + 1, n))
        alpha1 = K.product_signature(prefix, ex1).alpha1
        q = K.make_strip_query(ex1, prefix, float(rng.uniform(0.2, 0.9)) * alpha1)
        res = K.strip_measure_oracle(ex1, sstar, q, extension_cap=8)
        assert res.mu_upper <= res.bound * (1 + 1e-9), \
            f"strip mass {res.mu_upper:.6e} exceeds bound {res.bound:.6e} at {prefix}"
        checked += 1
    assert checked == 20

    q = K.make_strip_query(central_fixture, (1,), 0.5)
    res = K.strip_measure_oracle(central_fixture, 0.9, q, extension_cap=6)
    expected = K.kaenmaki_cylinder(central_fixture, 0.9, (1,))
    assert res.covered
    assert res.mu_lower == expected and res.mu_upper == expected, \
        "full-cylinder case not exact"
    _passed(10, f"20 randomized queries bounded; covered case returns "
                f"{expected!r} exactly")


def test_extra_box_count_diagnostic(ex1, sstar, ex1_samples):
    """Not a numbered criterion: occupied-box slope vs the pressure root.

    Diagnostic only; the comparison value is this library's own pressure
    root, and the agreement window is the documented 0.2.
    """
    slope = K.box_count(ex1_samples, 2.0 ** np.arange(-2, -8, -1))
    assert abs(slope - sstar) <= 0.2, f"box slope {slope:.4f} vs {sstar:.4f}"
    print(f"box-count diagnostic: slope {slope:.4f} vs pressure root {sstar:.4f}")


def test_criterion_11_determinism(tmp_path):
    """sample/render/estimate: byte-identical across repeats and thread caps."""
    spec_path = tmp_path / "ex1.json"
    spec_path.write_text(EX1_JSON)

    def run_all(tag, threads):
        paths = {}
        paths["csv"] = tmp_path / f"s{tag}.csv"
        assert cli_main(["sample", "--spec", str(spec_path), "--count", "2000",
                         "--depth", "50", "--seed", "7", "--threads", threads,
                         "--out", str(paths['csv'])]) == 0
        paths["pgm"] = tmp_path / f"r{tag}.pgm"
        assert cli_main(["render", "--spec", str(spec_path), "--count", "20000",
                         "--depth", "25", "--seed", "9", "--px", "256",
                         "--threads", threads, "--out", str(paths['pgm'])]) == 0
        paths["est"] = tmp_path / f"e{tag}.json"
        assert cli_main(["estimate", "--spec", str(spec_path), "--count", "50000",
                         "--depth", "20", "--seed", "11", "--radii", "0.01:0.2:5",
                         "--threads", threads, "--out", str(paths['est'])]) == 0
        return {k: p.read_bytes() for k, p in paths.items()}

    first = run_all("a", "1")
    second = run_all("b", "1")
    threaded = run_all("c", "4")
    assert first == second, "repeated runs differ"
    assert first == threaded, "outputs depend on the thread cap"
    _passed(11, "sample/render/estimate byte-identical across runs and "
                "thread caps 1 and 4")

"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or validation error.
All randomized subcommands take --seed and are bit-reproducible; --threads
(or the KAENMAKI_THREADS variable) caps worker pools and never changes
results, since every reduction runs in a fixed order.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys

import numpy as np

from . import dimension, sampling, thermo
from .coding import as_word, check_mixing, product_signature, encode_tau, transition_matrix
from .errors import KaenmakiError, TooLarge
from .ifs import IfsSpec, check_strong_separation, check_transversality, parse_ifs
from .thermo import PotentialIndex


def _read_spec(path: str) -> IfsSpec:
    if path == "-":
        return parse_ifs(sys.stdin.read())
    with open(path) as fh:
        return parse_ifs(fh.read())


def _resolve_s(spec: IfsSpec, s_arg: float | None) -> float:
    if s_arg is not None:
        if not (0.0 < s_arg < 2.0):
            from .errors import SOutOfRange
            raise SOutOfRange(f"--s {s_arg} must lie in (0,2)")
        return s_arg
    if spec.s is not None:
        return spec.s
    value = thermo.affinity_dimension(spec)
    return min(value, 2.0 - 1e-12)


def _parse_radii(text: str) -> np.ndarray:
    try:
        rmin, rmax, k = text.split(":")
        grid = np.geomspace(float(rmin), float(rmax), int(k))
    except ValueError:
        raise KaenmakiError(f"bad radii spec {text!r}, expected rmin:rmax:k") from None
    return grid


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def cmd_validate(args) -> int:
    spec = _read_spec(args.spec)
    sep = check_strong_separation(spec)
    trans = check_transversality(spec)
    mixing = check_mixing(transition_matrix(spec.d, spec.l))
    print(f"d: {spec.d}")
    print(f"l: {spec.l}")
    print(f"strong_separation: {str(sep.strong_separation).lower()}")
    print(f"min_gap: {sep.min_gap!r}")
    if sep.failing_pair:
        print(f"failing_pair: {sep.failing_pair}")
    print(f"transversality_holds: {str(trans.holds).lower()}")
    print(f"transversality_norm_sufficient: {str(trans.norm_sufficient).lower()}")
    print("transversality_convention: u,v assigned by map kind "
          "(diagonal: u=a, v=b; anti-diagonal: u=a*max_b, v=b*max_a)")
    print(f"mixing: {str(mixing).lower()}")
    return 0


def cmd_report(args) -> int:
    spec = _read_spec(args.spec)
    s = _resolve_s(spec, args.s)
    report = dimension.dimension_report(spec, s)
    if args.output == "json":
        payload = {"s": s, **report.to_dict()}
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        lines = [f"s: {s!r}"]
        for key, value in report.to_dict().items():
            lines.append(f"{key}: {value!r}")
        _emit("\n".join(lines), args.out)
    return 0


def cmd_pressure(args) -> int:
    spec = _read_spec(args.spec)
    s = _resolve_s(spec, args.s)
    t = PotentialIndex(args.t)
    print(repr(thermo.pressure(spec, s, t)))
    return 0


def cmd_affinity(args) -> int:
    spec = _read_spec(args.spec)
    detail = thermo.affinity_dimension_detail(spec)
    print(f"affinity_dim: {detail.value!r}")
    print(f"clamped: {str(detail.clamped).lower()}")
    return 0


def cmd_measure(args) -> int:
    spec = _read_spec(args.spec)
    s = _resolve_s(spec, args.s)
    word = as_word([int(x) for x in args.word.split(",")], spec.d)
    value = thermo.kaenmaki_cylinder(spec, s, word)
    print(repr(value))
    return 0


def _verify_key_identity(spec: IfsSpec, s: float, depth: int, corrupt: bool) -> float:
    """Worst log disagreement between the two phi routes over words up to depth."""
    w1 = thermo._weight_vector(spec, s, PotentialIndex.ONE).copy()
    w2 = thermo._weight_vector(spec, s, PotentialIndex.TWO).copy()
    if corrupt:
        w1[0] += 1e-6  # negative-control hook
    worst = 0.0
    for n in range(1, depth + 1):
        for w in itertools.product(range(1, spec.d + 1), repeat=n):
            sig = product_signature(w, spec)
            if s < 1.0:
                via_svd = s * sig.log_alpha1
            else:
                via_svd = sig.log_alpha1 + (s - 1.0) * sig.log_alpha2
            coded = np.asarray(encode_tau(w, spec).symbols) - 1
            via_b = max(float(w1[coded].sum()), float(w2[coded].sum()))
            worst = max(worst, abs(via_svd - via_b))
    return worst


def cmd_verify(args) -> int:
    spec = _read_spec(args.spec)
    depth = args.max_depth
    if spec.d ** depth > thermo.ENUMERATION_CAP:
        raise TooLarge(f"{spec.d}^{depth} exceeds the enumeration cap")
    s = _resolve_s(spec, args.s)
    results = []

    worst = _verify_key_identity(spec, s, min(depth, 8), corrupt=args.corrupt_potential)
    results.append(("phi max-of-sides identity", worst <= 1e-12, f"max log diff {worst:.3e}"))

    nu = thermo.kaenmaki_measure(spec, s)
    lo, up = nu.envelope()
    log_phi, log_nu = thermo.level_log_measures(spec, s, depth)
    p = thermo.pressure(spec, s)
    ratio = np.exp(log_nu - log_phi + depth * p)
    ok_env = bool((ratio >= lo * (1 - 1e-9)).all() and (ratio <= up * (1 + 1e-9)).all())
    results.append(("cylinder envelope", ok_env,
                    f"ratios in [{ratio.min():.6f}, {ratio.max():.6f}] vs [{lo:.6f}, {up:.6f}]"))

    w11 = thermo._weight_vector(spec, 1.0, PotentialIndex.ONE)
    w21 = thermo._weight_vector(spec, 1.0, PotentialIndex.TWO)
    int_11_m1 = float(nu.m1.stationary @ w11)
    int_21_m2 = float(nu.m2.stationary @ w21)
    int_21_m1 = float(nu.m1.stationary @ w21)
    chi_ok = abs(int_11_m1 - int_21_m2) <= 1e-12 and int_11_m1 >= int_21_m1 - 1e-12
    results.append(("side-length integrals ordered", chi_ok,
                    f"int f11 dm1 = {int_11_m1:.9f} >= int f21 dm1 = {int_21_m1:.9f}"))

    c_sub = up / lo ** 2
    wu, wl = thermo.submultiplicativity_check(spec, s, min(depth, 8))
    results.append(("submultiplicativity", wu <= c_sub * (1 + 1e-9),
                    f"worst upper {wu:.4f} <= C {c_sub:.4f}; worst lower {wl:.3e}"))

    diag_idx = next((k + 1 for k, m in enumerate(spec.maps)
                     if not m.anti and m.a != m.b), None)
    anti_idx = next((k + 1 for k, m in enumerate(spec.maps) if m.anti), None)
    if diag_idx is not None:
        ratios = [thermo.quasi_bernoulli_ratio(spec, s, diag_idx, anti_idx, n)
                  for n in range(1, 5)]
        dec = all(r2 < r1 for r1, r2 in zip(ratios, ratios[1:]))
        results.append(("two-sided comparability decay", dec,
                        "ratios " + ", ".join(f"{r:.3e}" for r in ratios)))
    else:
        results.append(("two-sided comparability decay", True, "skipped: degenerate ratios"))

    if check_strong_separation(spec).strong_separation:
        ok_strip = True
        details = []
        for prefix in [(1,), (spec.d,), (1, spec.d)]:
            qy = sampling.make_strip_query(spec, prefix, 0.5 * _alpha1(spec, prefix))
            res = sampling.strip_measure_oracle(spec, s, qy, min(depth, 8))
            ok_strip &= res.mu_upper <= res.bound * (1 + 1e-9)
            details.append(f"{prefix}: {res.mu_upper:.3e} <= {res.bound:.3e}")
            n_anti = sum(1 for i in prefix if i >= spec.l)
            if n_anti % 2 == 0:
                rev = sampling.strip_reverse_oracle(spec, s, qy, min(depth, 8))
                ok_strip &= (rev.mu_lower >= rev.rhs_lower * (1 - 1e-9)
                             and rev.mu_upper >= rev.rhs_upper * (1 - 1e-9))
        results.append(("strip measure bounds", ok_strip, "; ".join(details)))
    else:
        results.append(("strip measure bounds", True, "skipped: no separation certificate"))

    width = max(len(name) for name, _, _ in results)
    failed = False
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        failed |= not ok
        print(f"{status}  {name.ljust(width)}  {detail}")
    return 1 if failed else 0


def _alpha1(spec: IfsSpec, prefix) -> float:
    return product_signature(prefix, spec).alpha1


def cmd_sample(args) -> int:
    spec = _read_spec(args.spec)
    s = _resolve_s(spec, args.s)
    samples = sampling.sample_symbolic(spec, s, args.count, args.depth, args.seed)
    if args.out:
        sampling.write_csv(samples, args.out)
    else:
        print("x,y,word")
        for (px, py), wd in zip(samples.points, samples.words):
            print(f"{float(px)!r},{float(py)!r},{''.join(str(int(i)) for i in wd)}")
    return 0


def cmd_render(args) -> int:
    spec = _read_spec(args.spec)
    s = _resolve_s(spec, args.s)
    samples = sampling.sample_symbolic(spec, s, args.count, args.depth, args.seed)
    sampling.render_attractor(samples, args.px, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_estimate(args) -> int:
    spec = _read_spec(args.spec)
    s = _resolve_s(spec, args.s)
    samples = sampling.sample_symbolic(spec, s, args.count, args.depth, args.seed)
    radii = _parse_radii(args.radii)
    if args.target == "local":
        centers = sampling.default_centers(samples, args.centers)
        slope, stderr = sampling.estimate_local_dimension(samples, centers, radii)
    elif args.target == "projected":
        slope, stderr = sampling.estimate_projected_dim(
            samples, sampling.Projection.X, radii=radii)
    else:
        slope = sampling.box_count(samples, radii)
        stderr = 0.0
    payload = {"target": args.target, "slope": slope, "stderr": stderr,
               "count": args.count, "depth": args.depth, "seed": args.seed}
    if args.out:
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        print(f"slope: {slope!r} stderr: {stderr!r}")
    return 0


def cmd_project_dim(args) -> int:
    spec = _read_spec(args.spec)
    s = _resolve_s(spec, args.s)
    mode = {
        "auto": None,
        "ssc": dimension.ProjectedMode.SSC_FORMULA,
        "expected": dimension.ProjectedMode.EXPECTED_MIN,
        "user": dimension.ProjectedMode.USER_SUPPLIED,
        "mc": dimension.ProjectedMode.MONTE_CARLO,
    }[args.mode]
    mc_options = dict(count=args.count, depth=args.depth, seed=args.seed)
    proj = dimension.projected_dimension(spec, s, mode_request=mode,
                                         user_value=args.value, mc_options=mc_options)
    if proj is None:
        print("projected_dim: unknown (no certificate and norm conditions fail)")
        return 1
    print(f"projected_dim: {proj.value!r}")
    print(f"mode: {proj.mode.value}")
    print(f"ssc_certified: {str(proj.ssc_certified).lower()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kaenmaki",
        description="Equilibrium measures and dimension reports for planar "
                    "diagonal/anti-diagonal systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, s_opt=True):
        p.add_argument("--spec", required=True,
                       help="path to a JSON system config, or - for stdin")
        if s_opt:
            p.add_argument("--s", type=float, default=None,
                           help="dimension parameter in (0,2); defaults to the "
                                "config value or the affinity dimension")
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("KAENMAKI_THREADS", "0")) or None,
                       help="worker cap; results never depend on it")

    p = sub.add_parser("validate", help="parse a config and print hypothesis checks")
    common(p, s_opt=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="full dimension report")
    common(p)
    p.add_argument("--output", choices=["text", "json"], default="text")
    p.add_argument("--out", default=None, help="write the report to a file")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pressure", help="pressure at a parameter value")
    common(p)
    p.add_argument("--t", type=int, choices=[1, 2], default=1)
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("affinity", help="root of the pressure")
    common(p, s_opt=False)
    p.set_defaults(func=cmd_affinity)

    p = sub.add_parser("measure", help="cylinder mass of a word")
    common(p)
    p.add_argument("--word", required=True, help="comma-separated symbols, e.g. 1,2,2,1")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("verify", help="run the identity and bound checks at an "
                                      "enumeration depth")
    common(p)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--corrupt-potential", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="draw measure-distributed points as CSV")
    common(p)
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("render", help="render sampled points to a PGM image")
    common(p)
    p.add_argument("--count", type=int, default=200000)
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--px", type=int, default=512)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("estimate", help="Monte Carlo dimension estimators")
    common(p)
    p.add_argument("--count", type=int, default=1000000)
    p.add_argument("--depth", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radii", default="0.002:0.0625:6", help="rmin:rmax:k geometric grid")
    p.add_argument("--centers", type=int, default=20)
    p.add_argument("--target", choices=["local", "projected", "box"], default="local")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("project-dim", help="projected dimension with mode selection")
    common(p)
    p.add_argument("--mode", choices=["auto", "ssc", "expected", "user", "mc"],
                   default="auto")
    p.add_argument("--value", type=float, default=None, help="value for --mode user")
    p.add_argument("--count", type=int, default=200000)
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_project_dim)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KaenmakiError as e:
        print(str(e), file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"BadArgument: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"IoFailure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

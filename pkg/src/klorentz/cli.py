"""Command-line front end.

Every JSON report carries ``tool_version``, ``seed``, ``samples`` and ``tol``.
Exit codes: 0 for success, CertifiedYes or Unknown; 1 for CertifiedNo (the
witness is in the report); 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .certificate import Certificate, Status, jsonable
from .cones import ConeError, GeneratedCone, inner_approximation
from .exact import DimensionError, vec
from .polycore import Polynomial, SymMatrix

log = logging.getLogger("klorentz")


class InputError(ValueError):
    pass


# -- input helpers ------------------------------------------------------------------


def _read_json(text: str, what: str):
    """Inline JSON (starting with ``{`` or ``[``) or a path to a JSON file."""
    src = text.strip()
    if not src.startswith(("{", "[")):
        try:
            src = Path(text).read_text()
        except OSError as exc:
            raise InputError(f"{what}: cannot read {text!r} ({exc.strerror})") from None
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def _poly(args, attr: str = "poly") -> Polynomial:
    try:
        return Polynomial.from_json(_read_json(getattr(args, attr), f"--{attr}"))
    except InputError:
        raise
    except (ValueError, TypeError, AttributeError) as exc:
        raise InputError(f"--{attr}: {exc}") from None


def _vector(text: str, what: str):
    data = _read_json(text, what)
    if not isinstance(data, list) or not data:
        raise InputError(f"{what}: expected a nonempty JSON list")
    try:
        return vec(data)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"{what}: {exc}") from None


def _matrix(text: str, what: str = "--matrix"):
    from .semipositive import matrix_from_json

    data = _read_json(text, what)
    if isinstance(data, list):
        data = {"rows": data}
    try:
        return matrix_from_json(data)
    except ValueError as exc:
        raise InputError(f"{what}: {exc}") from None


def _sym(text: str, what: str = "--matrix") -> SymMatrix:
    rows = _matrix(text, what)
    try:
        return SymMatrix.from_rows(rows)
    except ValueError as exc:
        raise InputError(f"{what}: {exc}") from None


def _cone(args, n: int) -> GeneratedCone:
    if getattr(args, "cone", None) is None:
        return GeneratedCone.orthant(n)
    try:
        K = GeneratedCone.from_json(_read_json(args.cone, "--cone"))
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"--cone: {exc}") from None
    if K.nvars != n:
        raise InputError(f"--cone: field 'nvars' is {K.nvars}, expected {n}")
    return K


def _points(text: str | None, what: str = "--points"):
    if text is None:
        return []
    data = _read_json(text, what)
    if not isinstance(data, list) or not all(isinstance(p, list) for p in data):
        raise InputError(f"{what}: expected a JSON list of points")
    try:
        return [vec(p) for p in data]
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"{what}: {exc}") from None


# -- output -------------------------------------------------------------------------


def _report(args, payload: dict) -> dict:
    head = {
        "tool_version": __version__,
        "command": f"{args.group} {args.action}",
        "seed": args.seed,
        "samples": args.samples,
        "tol": args.tol,
    }
    head.update(payload)
    return jsonable(head)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text)


def _emit(args, payload: dict, status: Status | None = None) -> int:
    _write(args.out, json.dumps(_report(args, payload), indent=2) + "\n")
    return 1 if status is Status.NO else 0


def _emit_cert(args, cert: Certificate, **extra) -> int:
    return _emit(args, {"status": cert.status.value, "certificate": cert.to_json(), **extra}, cert.status)


# -- poly ---------------------------------------------------------------------------


def cmd_poly(args) -> int:
    from . import realroots

    f = _poly(args)
    if args.action == "show":
        return _emit(args, {"polynomial": f.to_json(), "text": str(f), "degree": f.degree, "homogeneous_degree": f.is_homogeneous()})
    if args.action == "eval":
        x = _vector(args.x, "--x")
        _check_len(x, f.nvars, "--x")
        return _emit(args, {"x": x, "value": f.eval(x)})
    if args.action == "restrict":
        x, v = _vector(args.x, "--x"), _vector(args.dir, "--dir")
        _check_len(x, f.nvars, "--x")
        _check_len(v, f.nvars, "--dir")
        coeffs = f.restriction_taylor(x, v)
        out = {"x": x, "dir": v, "taylor": coeffs}
        if realroots.trim(coeffs):
            out["distinct_real_roots"] = realroots.count_real_roots(coeffs)
            out["real_rooted"] = realroots.is_real_rooted(coeffs)
        return _emit(args, out)
    if args.action == "tower":
        v = _vector(args.dir, "--dir")
        _check_len(v, f.nvars, "--dir")
        tower = f.derivative_tower(v)
        return _emit(args, {"dir": v, "tower": [p.to_json() for p in tower], "text": [str(p) for p in tower]})
    raise AssertionError(args.action)


def _check_len(x, n: int, what: str) -> None:
    if len(x) != n:
        raise InputError(f"{what}: length {len(x)}, expected {n}")


# -- certify ------------------------------------------------------------------------


def cmd_certify(args) -> int:
    from . import lorentz

    if args.action == "quadratic":
        Q = _sym(args.matrix)
        K = _cone(args, Q.n)
        cert = lorentz.quadratic_lorentzian(Q, K, seed=args.seed)
        return _emit_cert(args, cert, inertia=lorentz.inertia(Q).as_tuple())
    f = _poly(args)
    if args.action == "ulc":
        ok = lorentz.ulc_bivariate(f)
        status = Status.YES if ok else Status.NO
        return _emit(args, {"ulc": ok, "status": status.value}, status)
    if args.action == "hyperbolic":
        e = _vector(args.dir, "--dir")
        _check_len(e, f.nvars, "--dir")
        cert = lorentz.hyperbolicity_check(f, e, samples=args.samples, seed=args.seed, points=_points(args.points))
        return _emit_cert(args, cert)
    K = _cone(args, f.nvars)
    if args.action == "lorentzian":
        return _emit_cert(args, lorentz.k_lorentzian_check(f, K, samples=args.samples, seed=args.seed))
    if args.action == "clc":
        return _emit_cert(args, lorentz.clc_check(f, K, samples=args.samples, seed=args.seed))
    raise AssertionError(args.action)


# -- cone ---------------------------------------------------------------------------


def _tower(args):
    from .tower import ConeTower

    f = _poly(args)
    v = _vector(args.dir, "--dir")
    _check_len(v, f.nvars, "--dir")
    return ConeTower.build(f, v)


def cmd_cone(args) -> int:
    from . import tower as tw

    if args.action == "membership":
        T = _tower(args)
        x = _vector(args.x, "--x")
        _check_len(x, T.nvars, "--x")
        cls = T.classify(x)
        out = {"x": x, "class": cls.value, "tower_values": T.values(x)}
        if cls is tw.MembershipClass.CLOSED_ONLY:
            out["boundary"] = tw.boundary_classify(T, x)
        return _emit(args, out)
    if args.action == "region":
        T = _tower(args)
        box = _vector(args.box, "--box")
        if len(box) != 2:
            raise InputError("--box: expected [lo, hi]")
        if args.resolution < 2:
            raise InputError("--resolution: must be at least 2")
        if args.resolution**T.nvars > tw.MAX_CLOUD_POINTS:
            raise InputError(f"--resolution: grid exceeds {tw.MAX_CLOUD_POINTS} points")
        lines = [",".join([f"x{i + 1}" for i in range(T.nvars)] + ["class"])]
        for p, cls in tw.region_cloud(T, tuple(box), args.resolution):
            lines.append(",".join([repr(float(a)) for a in p] + [cls.value]))
        _write(args.out, "\n".join(lines) + "\n")
        return 0
    if args.action == "convexity":
        T = _tower(args)
        if args.orthant:
            region = inner_approximation(
                lambda u: all(a >= 0 for a in u) and u in T, T.nvars, n_rays=args.rays, seed=args.seed
            )
            cert = tw.convexity_falsifier(region, trials=args.trials, seed=args.seed)
            return _emit_cert(args, cert, region="inner approximation of K(f,v) ∩ orthant", rays=args.rays)
        cert = tw.convexity_falsifier(T, trials=args.trials, seed=args.seed)
        return _emit_cert(args, cert, region="K(f,v)")
    if args.action == "approximate":
        T = _tower(args)
        K = inner_approximation(
            lambda u: all(a >= 0 for a in u) and u in T, T.nvars, n_rays=args.rays, seed=args.seed
        )
        return _emit(args, {"rays": args.rays, "cone": K.to_json(), "extreme_rays": K.extreme_rays().to_json()})
    K = _cone_required(args)
    if args.action == "properness":
        flags = K.properness()
        return _emit(args, {"pointed": flags.pointed, "full_dimensional": flags.full_dimensional, "proper": flags.proper, "pointedness_certificate": K.pointedness_certificate()})
    if args.action == "contains":
        x = _vector(args.x, "--x")
        _check_len(x, K.nvars, "--x")
        lam = K.decompose(x)
        return _emit(args, {"x": x, "contains": lam is not None, "coefficients": lam, "tolerance_mode": K.contains(x, mode="tolerance", tol=args.tol)})
    if args.action == "project":
        z = [float(a) for a in _vector(args.z, "--z")]
        _check_len(z, K.nvars, "--z")
        return _emit(args, {"z": z, "projection": K.project(z)})
    if args.action == "acute":
        Q = _sym(args.matrix)
        if Q.n != K.nvars:
            raise InputError(f"--matrix: size {Q.n}, expected {K.nvars}")
        return _emit_cert(args, K.acute_wrt(Q, seed=args.seed))
    raise AssertionError(args.action)


def _cone_required(args) -> GeneratedCone:
    try:
        return GeneratedCone.from_json(_read_json(args.cone, "--cone"))
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"--cone: {exc}") from None


# -- rayleigh -----------------------------------------------------------------------


def cmd_rayleigh(args) -> int:
    from . import lorentz

    f = _poly(args)
    if args.action == "matrix":
        x = _vector(args.x, "--x")
        _check_len(x, f.nvars, "--x")
        M = lorentz.rayleigh_matrix(f, x)
        return _emit(args, {"x": x, "M": M.to_json(), "log_hessian_residual": lorentz.log_hessian_identity_check(f, x)})
    if args.action == "cross":
        v, w = _vector(args.v, "--v"), _vector(args.w, "--w")
        _check_len(v, f.nvars, "--v")
        _check_len(w, f.nvars, "--w")
        R = lorentz.rayleigh_cross_poly(f, v, w)
        out = {"v": v, "w": w, "polynomial": R.to_json(), "text": str(R)}
        if args.x is not None:
            x = _vector(args.x, "--x")
            _check_len(x, f.nvars, "--x")
            out["value"] = R.eval(x)
        return _emit(args, out)
    if args.action == "delta":
        for name in ("i", "j"):
            if not 0 <= getattr(args, name) < f.nvars:
                raise InputError(f"--{name}: index out of range for {f.nvars} variables")
        D = lorentz.delta_ij(f, args.i, args.j)
        return _emit(args, {"i": args.i, "j": args.j, "polynomial": D.to_json(), "text": str(D)})
    raise AssertionError(args.action)


# -- semipositive -------------------------------------------------------------------


def cmd_semipositive(args) -> int:
    from . import semipositive as sp

    A = _matrix(args.matrix)
    n = len(A)
    if any(len(r) != n for r in A):
        raise InputError("--matrix: field 'rows' must form a square matrix")
    if args.action == "generating":
        model = sp.SemipositiveModel.from_matrix(A)
        return _emit(args, {"polynomial": model.fA.to_json(), "text": str(model.fA), "direction": model.e})
    if args.action == "check":
        return _emit_cert(args, sp.is_semipositive(A, _cone(args, n), seed=args.seed, samples=args.samples))
    if args.action == "preserves":
        K = _cone(args, n) if args.cone is not None else sp.hyperbolicity_cone(A)
        res = sp.preserves_cone(A, K)
        if not res.equality:
            log.warning("A(K) = K does not hold for this matrix (forward inclusion: %s)", res.forward)
        return _emit(args, {"cone": K.to_json(), "forward": res.forward, "equality": res.equality})
    if args.action == "cone":
        K = sp.semipositive_cone(A)
        return _emit(args, {"cone": K.to_json()})
    raise AssertionError(args.action)


# -- gibbs --------------------------------------------------------------------------


def cmd_gibbs(args) -> int:
    from .gibbs import GibbsModel, rayleigh_measure_check

    try:
        model = GibbsModel.from_polynomial(_poly(args))
    except ValueError as exc:
        raise InputError(f"--poly: {exc}") from None
    if args.action == "stats":
        x = _vector(args.x, "--x")
        _check_len(x, model.nvars, "--x")
        return _emit(args, {"x": x, "mean": model.mean(x), "mean_from_gradient": model.mean_from_gradient(x), "covariance": model.covariance(x).to_json()})
    if args.action == "prob":
        x = _vector(args.x, "--x")
        _check_len(x, model.nvars, "--x")
        alpha = _read_json(args.alpha, "--alpha")
        if not isinstance(alpha, list) or len(alpha) != model.nvars:
            raise InputError(f"--alpha: expected a list of {model.nvars} integers")
        return _emit(args, {"x": x, "alpha": alpha, "prob": model.prob(x, alpha)})
    if args.action == "rayleigh":
        K = _cone(args, model.nvars)
        return _emit_cert(args, rayleigh_measure_check(model, K, samples=args.samples, seed=args.seed))
    raise AssertionError(args.action)


# -- levi ---------------------------------------------------------------------------


def cmd_levi(args) -> int:
    from . import levi

    if args.action == "copositivity":
        Q = _sym(args.matrix)
        return _emit_cert(args, levi.copositivity(Q, _cone(args, Q.n), seed=args.seed, samples=args.samples))
    try:
        sys_ = levi.LeviSystem.from_json(_read_json(args.system, "--system"))
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"--system: {exc}") from None
    if args.action == "simulate":
        x0 = [float(a) for a in _vector(args.x0, "--x0")]
        _check_len(x0, sys_.n, "--x0")
        traj = sys_.simulate(x0, args.h, args.T)
        _write(args.out, traj.to_csv())
        if args.report:
            summary = {"x0": x0, "h": args.h, "T": args.T, "steps": len(traj.times) - 1, "final": traj.final, "final_norm": float(traj.norms()[-1])}
            Path(args.report).write_text(json.dumps(_report(args, summary), indent=2) + "\n")
        return 0
    if args.action == "stability":
        starts = [[float(a) for a in p] for p in _points(args.x0, "--x0")] or levi.standard_starts(sys_.K)
        report = levi.stability_experiment(sys_, starts, h=args.h, T=args.T, seed=args.seed)
        return _emit(args, {"verdict": report.verdict.value, "report": report.to_json()})
    if args.action == "lyapunov":
        half = [[Fraction(int(i == j), 2) for j in range(sys_.n)] for i in range(sys_.n)]
        P = _sym(args.P, "--P") if args.P else SymMatrix.from_rows(half)
        if P.n != sys_.n:
            raise InputError(f"--P: size {P.n}, expected {sys_.n}")
        semi = levi.lyapunov_semistability_check(sys_.A_exact, P, sys_.K, seed=args.seed)
        cond = levi.lyapunov_condition_check(sys_, P, sigma=args.sigma, lam=args.lam, samples=args.samples, seed=args.seed)
        status = Status.NO if (semi.no or cond.no) else semi.status
        return _emit(args, {"status": status.value, "semistability": semi.to_json(), "conditions": cond.to_json()}, status)
    raise AssertionError(args.action)


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--out", default="-", help="output path, '-' for standard output")

    parser = argparse.ArgumentParser(prog="klorentz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    def group(name, handler, help_):
        g = groups.add_parser(name, help=help_)
        g.set_defaults(handler=handler)
        sub = g.add_subparsers(dest="action", required=True)
        return lambda action, help_=None: sub.add_parser(action, parents=[common], help=help_)

    poly = group("poly", cmd_poly, "polynomial utilities")
    p = poly("show", "canonical form of a polynomial")
    p.add_argument("--poly", required=True)
    p = poly("eval", "exact evaluation")
    p.add_argument("--poly", required=True)
    p.add_argument("--x", required=True)
    p = poly("restrict", "Taylor coefficients of t -> f(x + t v)")
    p.add_argument("--poly", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--dir", required=True)
    p = poly("tower", "derivative tower along a direction")
    p.add_argument("--poly", required=True)
    p.add_argument("--dir", required=True)

    cert = group("certify", cmd_certify, "certificates for forms")
    p = cert("ulc", "ultra log-concavity of a bivariate form")
    p.add_argument("--poly", required=True)
    p = cert("hyperbolic", "search for a non-real-rooted restriction")
    p.add_argument("--poly", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--points", help="JSON list of points to test first")
    for name in ("lorentzian", "clc"):
        p = cert(name, f"{name} check on a cone (default: orthant)")
        p.add_argument("--poly", required=True)
        p.add_argument("--cone")
    p = cert("quadratic", "Lorentzian check of a quadratic form given by its matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--cone")

    cone = group("cone", cmd_cone, "cones and derivative-tower cones")
    p = cone("membership", "membership class in K(f,v)")
    p.add_argument("--poly", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--x", required=True)
    p = cone("region", "CSV point cloud of K(f,v) over a box")
    p.add_argument("--poly", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--box", default="[-2,2]")
    p.add_argument("--resolution", type=int, default=200)
    p = cone("convexity", "midpoint convexity falsifier")
    p.add_argument("--poly", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--orthant", action="store_true", help="use the inner approximation of K(f,v) ∩ orthant")
    p.add_argument("--rays", type=int, default=200)
    p = cone("approximate", "polyhedral inner approximation of K(f,v) ∩ orthant")
    p.add_argument("--poly", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--rays", type=int, default=200)
    p = cone("properness", "pointedness and full-dimensionality")
    p.add_argument("--cone", required=True)
    p = cone("contains", "exact membership with coefficients")
    p.add_argument("--cone", required=True)
    p.add_argument("--x", required=True)
    p = cone("project", "Euclidean projection")
    p.add_argument("--cone", required=True)
    p.add_argument("--z", required=True)
    p = cone("acute", "acuteness with respect to a symmetric matrix")
    p.add_argument("--cone", required=True)
    p.add_argument("--matrix", required=True)

    ray = group("rayleigh", cmd_rayleigh, "Rayleigh matrices and differences")
    p = ray("matrix", "M_f(x) = grad f grad f^T - f Hess f")
    p.add_argument("--poly", required=True)
    p.add_argument("--x", required=True)
    p = ray("cross", "R_{v,w} f as a polynomial")
    p.add_argument("--poly", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--x")
    p = ray("delta", "Delta_ij f as a polynomial")
    p.add_argument("--poly", required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)

    sp = group("semipositive", cmd_semipositive, "generating polynomials and semipositive cones")
    p = sp("generating", "f_A and its hyperbolic direction")
    p.add_argument("--matrix", required=True)
    p = sp("check", "is A semipositive on a cone (default: orthant)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--cone")
    p = sp("preserves", "A(K) in K and A(K) = K (default K: hyperbolicity cone of f_A)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--cone")
    p = sp("cone", "extreme rays of {x >= 0 : A x >= 0}")
    p.add_argument("--matrix", required=True)

    gb = group("gibbs", cmd_gibbs, "Gibbs measures")
    p = gb("stats", "mean and covariance")
    p.add_argument("--poly", required=True)
    p.add_argument("--x", required=True)
    p = gb("prob", "probability of one exponent")
    p.add_argument("--poly", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--alpha", required=True)
    p = gb("rayleigh", "Rayleigh measure check on a cone (default: orthant)")
    p.add_argument("--poly", required=True)
    p.add_argument("--cone")

    lv = group("levi", cmd_levi, "cone-constrained LEVI dynamics")
    p = lv("simulate", "trajectory CSV")
    p.add_argument("--system", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--T", type=float, default=20.0)
    p.add_argument("--report", help="optional JSON summary path")
    p = lv("stability", "stability experiment (default starts: generators and their sum)")
    p.add_argument("--system", required=True)
    p.add_argument("--x0", help="JSON list of start points")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--T", type=float, default=20.0)
    p = lv("copositivity", "copositivity of a symmetric matrix on a cone (default: orthant)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--cone")
    p = lv("lyapunov", "Lyapunov conditions for V = x^T P x (default P = I/2)")
    p.add_argument("--system", required=True)
    p.add_argument("--P")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=0.0)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    if args.samples < 0:
        print("klorentz: error: --samples must be nonnegative", file=sys.stderr)
        return 2
    try:
        return args.handler(args)
    except (InputError, DimensionError, ConeError, ValueError) as exc:
        print(f"klorentz: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

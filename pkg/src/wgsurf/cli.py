"""Scenario-driven command line for the waveguide surface pipeline.

Subcommands
    threshold     essential-spectrum threshold + fiber band sweep
    potential     effective potential / broken constants + classification
    bound-states  2-D eigenvalue search below the threshold + certificate
    all           the full pipeline in one report

Scenarios are JSON files (see data/ for the shipped ones); unknown keys
are rejected so typos never silently change a computation.  All output
files are deterministic: repeated runs are byte-identical.

Exit codes: 0 success, 2 when the classification is mathematically
inconclusive (no spectral mechanism verified), 1 on operational errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .certificates import certify_broken, certify_int_v
from .errors import (
    DomainTooSmallError,
    PreconditionError,
    ScenarioError,
    WgsurfError,
)
from .geometry import (
    CrossSection,
    ProfileKind,
    ReferenceProfile,
    broken_profile,
    constant_slope_profile,
    flat_profile,
    make_circle_cross_section,
    make_tangent_angle_cross_section,
    reflection_symmetry_defect,
    tanh_bump_profile,
    tanh_profile,
)
from .potential import (
    Verdict,
    classify,
    compute_broken_constants,
    compute_profile,
    integral_V,
)
from .strip2d import find_bound_states
from .transverse import band_sweep, broken_threshold, essential_threshold

GOLDEN_VERSION = "wgsurf-golden-1"
_BAND_P = np.arange(-12, 13) * 0.25        # p in [-3, 3], step 0.25
_THRESHOLD_N_GRID = 1024


def _fmt(v: float) -> str:
    """Shortest round-trip decimal; deterministic across runs."""
    return repr(float(v))


def _check_keys(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(
            f"unknown key(s) {sorted(unknown)} in {where}; "
            f"allowed: {sorted(allowed)}"
        )


class Scenario:
    """Parsed scenario file plus its provenance hash."""

    def __init__(self, raw: dict):
        _check_keys(raw, {"name", "cross_section", "profile",
                          "resolution", "outputs"}, "scenario")
        for key in ("name", "cross_section", "profile", "resolution"):
            if key not in raw:
                raise ScenarioError(f"scenario is missing required key '{key}'")
        self.raw = raw
        self.name = raw["name"]
        canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
        self.hash = hashlib.sha256(canonical.encode()).hexdigest()

        cs_spec = raw["cross_section"]
        _check_keys(cs_spec, {"type", "n_samples", "sin_coeffs", "cos_coeffs"},
                    "cross_section")
        n_samples = int(cs_spec.get("n_samples", 256))
        if cs_spec["type"] == "circle":
            if "sin_coeffs" in cs_spec or "cos_coeffs" in cs_spec:
                raise ScenarioError("circle cross-section takes no coefficients")
            self.cross_section = make_circle_cross_section(n_samples)
        elif cs_spec["type"] == "tangent_angle":
            self.cross_section = make_tangent_angle_cross_section(
                cs_spec.get("sin_coeffs", []), n_samples,
                cos_coeffs=cs_spec.get("cos_coeffs"),
            )
        else:
            raise ScenarioError(
                f"unknown cross-section type '{cs_spec['type']}'")

        self.profile = _parse_profile(raw["profile"])

        res = raw["resolution"]
        _check_keys(res, {"n_t", "n_x", "L_list", "x_extent", "x_points"},
                    "resolution")
        self.n_t = int(res.get("n_t", 64))
        self.n_x = int(res.get("n_x", 159))
        self.L_list = [float(v) for v in res.get("L_list", [5.0, 10.0])]
        self.x_extent = float(res.get("x_extent", 30.0))
        self.x_points = int(res.get("x_points", 481))
        if self.x_points % 2 == 0 or self.x_points < 5:
            raise ScenarioError("x_points must be odd and >= 5 "
                                "(composite Simpson rule)")
        self.outputs = raw.get("outputs")

    @property
    def is_broken(self) -> bool:
        return self.profile.kind is ProfileKind.BROKEN

    def resolution_report(self) -> dict:
        return {
            "n_t": self.n_t, "n_x": self.n_x, "L_list": self.L_list,
            "x_extent": self.x_extent, "x_points": self.x_points,
            "threshold_n_grid": _THRESHOLD_N_GRID,
        }


def _parse_profile(spec: dict) -> ReferenceProfile:
    _check_keys(spec, {"type", "beta1", "beta2", "beta", "width", "bump",
                       "bump_width", "center", "table"}, "profile")
    kind = spec.get("type")
    if kind == "flat":
        return flat_profile()
    if kind == "constant_slope":
        return constant_slope_profile(float(spec.get("beta1", 0.0)),
                                      float(spec.get("beta2", 0.0)))
    if kind == "tanh":
        return tanh_profile(float(spec.get("beta1", 0.0)),
                            float(spec.get("beta2", 0.0)),
                            float(spec.get("width", 1.0)))
    if kind == "tanh_bump":
        return tanh_bump_profile(float(spec.get("beta1", 0.0)),
                                 float(spec.get("bump", 0.0)),
                                 float(spec.get("width", 1.0)),
                                 float(spec.get("bump_width", 1.0)),
                                 float(spec.get("center", 0.0)))
    if kind == "broken":
        return broken_profile(float(spec.get("beta", 0.5)))
    if kind == "table":
        return _table_profile(spec["table"])
    raise ScenarioError(f"unknown profile type '{kind}'")


def _table_profile(rows) -> ReferenceProfile:
    """Custom profile from a table of (x, f', g', f'', g'') rows.

    Values are linearly interpolated; outside the table the slopes are
    held at their end values and the curvatures set to zero, so the
    tabulated window must cover the region where the profile bends.
    """
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 5 or arr.shape[0] < 2:
        raise ScenarioError(
            "profile table must have >= 2 rows of [x, fp, gp, fpp, gpp]")
    x = arr[:, 0]
    if np.any(np.diff(x) <= 0):
        raise ScenarioError("profile table x values must be increasing")

    def interp(col, left, right):
        def f(xq):
            return np.interp(np.asarray(xq, dtype=float), x, arr[:, col],
                             left=left, right=right)
        return f

    beta1 = float(arr[-1, 1])
    beta2 = float(arr[-1, 2])
    return ReferenceProfile(
        ProfileKind.SMOOTH,
        interp(1, arr[0, 1], arr[-1, 1]),
        interp(2, arr[0, 2], arr[-1, 2]),
        interp(3, 0.0, 0.0),
        interp(4, 0.0, 0.0),
        beta1=beta1, beta2=beta2,
        description="tabulated profile",
    )


def load_scenario(path: str, overrides: dict) -> Scenario:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario '{path}': {exc}") from exc
    res = raw.setdefault("resolution", {})
    for key, value in overrides.items():
        if value is not None:
            res[key] = value
    return Scenario(raw)


def load_golden(path: str | None) -> dict:
    """Golden values: 'key value' lines, '#' comments."""
    if path is None:
        text = (resources.files("wgsurf") / "data" / "golden.txt").read_text()
    else:
        text = Path(path).read_text()
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, value = line.split()
        out[key] = float(value)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            str(v) if isinstance(v, (int, np.integer)) else _fmt(v)
            for v in row))
    path.write_text("\n".join(lines) + "\n")


def _report_base(sc: Scenario, golden_path: str | None) -> dict:
    return {
        "scenario": sc.name,
        "scenario_hash": sc.hash,
        "resolution": sc.resolution_report(),
        "golden_version": GOLDEN_VERSION,
        "golden_path": golden_path or "builtin",
        "tolerances": {
            "verdict_integral_sigmas": 3.0,
            "verdict_coupling_sigmas": 10.0,
            "certificate_sigmas": 5.0,
            "eigensolver_residual": 1e-9,
        },
        "version": __version__,
    }


def run_threshold(sc: Scenario, outdir: Path, golden_path=None) -> dict:
    if sc.is_broken:
        beta1, beta2 = 0.0, sc.profile.beta2
    else:
        beta1, beta2 = sc.profile.beta1, sc.profile.beta2
    e1, _chi, err = essential_threshold(sc.cross_section, beta1, beta2,
                                        _THRESHOLD_N_GRID)
    s = 1.0 + beta1 * beta1 + beta2 * beta2

    bands = band_sweep(sc.cross_section, beta1, beta2, 257, _BAND_P, k=5)
    at_zero = next(b for b in bands if b.p == 0.0)
    par_dev = max(
        float(np.max(np.abs(b.eigenvalues - at_zero.eigenvalues
                            - b.p * b.p / s)))
        for b in bands
    )
    _write_csv(outdir / f"{sc.name}_band.csv",
               ["p"] + [f"lambda{i + 1}" for i in range(5)],
               [[b.p] + list(b.eigenvalues) for b in bands])

    report = _report_base(sc, golden_path)
    report.update({
        "E1": e1,
        "error_estimate": err,
        "slope_norm_squared": s,
        "band_parabolic_deviation": par_dev,
        "band_csv": f"{sc.name}_band.csv",
    })
    _write_json(outdir / f"{sc.name}_threshold.json", report)
    return report


def run_potential(sc: Scenario, outdir: Path, golden_path=None) -> dict:
    report = _report_base(sc, golden_path)
    if sc.is_broken:
        consts = compute_broken_constants(sc.cross_section, sc.profile.beta2,
                                          n_t=513)
        cls = classify(broken=consts)
        report.update({
            "A_const": consts.A_const,
            "B_const": consts.B_const,
            "beta": consts.beta,
            "quadrature_error": consts.quadrature_error,
            "E1": consts.E1,
            "cross_section_mirror_defect":
                reflection_symmetry_defect(sc.cross_section),
            "verdict": cls.verdict.name,
            "verdict_details": cls.details,
        })
    else:
        x = np.linspace(-sc.x_extent, sc.x_extent, sc.x_points)
        epp = compute_profile(sc.cross_section, sc.profile, x, 513)
        try:
            int_v, int_err = integral_V(epp)
            domain_note = ""
        except DomainTooSmallError as exc:
            int_v, int_err = float("nan"), float("nan")
            domain_note = str(exc)
        cls = classify(epp=epp)
        _write_csv(outdir / f"{sc.name}_potential.csv",
                   ["x", "A", "B", "C", "D", "V"],
                   np.column_stack([epp.x_grid, epp.A, epp.B, epp.C,
                                    epp.D, epp.V]))
        report.update({
            "E_const": epp.E_const,
            "E1": epp.E1,
            "int_V": int_v,
            "int_V_error": int_err,
            "quadrature_error": epp.quadrature_error,
            "B_variation": float(np.max(epp.B) - np.min(epp.B)),
            "domain_note": domain_note,
            "potential_csv": f"{sc.name}_potential.csv",
            "verdict": cls.verdict.name,
            "verdict_details": cls.details,
        })
    _write_json(outdir / f"{sc.name}_potential.json", report)
    return report


def run_bound_states(sc: Scenario, outdir: Path, golden_path=None) -> dict:
    cs = sc.cross_section
    if sc.is_broken:
        beta = sc.profile.beta2
        e1, chi, _ = broken_threshold(cs, beta, _THRESHOLD_N_GRID)
    else:
        e1, chi, _ = essential_threshold(cs, sc.profile.beta1,
                                         sc.profile.beta2, _THRESHOLD_N_GRID)

    # keep the x-step fixed across the strip schedule
    hx = 2.0 * sc.L_list[-1] / (sc.n_x + 1)
    n_x_schedule = [max(33, int(round(2.0 * L / hx)) | 1) for L in sc.L_list]
    res = find_bound_states(cs, sc.profile, e1, sc.L_list, n_x_schedule,
                            n_t=sc.n_t, k=5)

    certificate = None
    cert_error = ""
    try:
        if sc.is_broken:
            cert = certify_broken(cs, sc.profile.beta2, e1, chi,
                                  n=2, n_t=sc.n_t)
        elif sc.profile.kind is ProfileKind.SMOOTH and (
                sc.profile.beta1 or sc.profile.beta2):
            cert = certify_int_v(cs, sc.profile, e1, chi,
                                 n_schedule=(2, 4), n_t=sc.n_t)
        else:
            cert = None
        if cert is not None:
            certificate = {
                "certified": cert.certified,
                "value": cert.value,
                "error_bar": cert.error_bar,
                "plateau_scale": cert.plateau_scale,
                "epsilon": cert.epsilon,
                "cross_term": cert.cross_term,
                "rayleigh_quotient": cert.rayleigh_quotient,
                "trend": cert.trend,
                "details": cert.details,
            }
    except (PreconditionError, WgsurfError) as exc:
        cert_error = f"{type(exc).__name__}: {exc}"

    cert_rq = certificate["rayleigh_quotient"] if certificate else float("nan")
    rows = [
        [i + 1, float(lam), e1 - float(lam),
         float(res.residual_norms[i]), cert_rq]
        for i, lam in enumerate(res.eigenvalues)
    ]
    _write_csv(outdir / f"{sc.name}_eigs.csv",
               ["index", "eigenvalue", "gap_to_threshold", "residual",
                "certificate_rayleigh_quotient"],
               rows)

    report = _report_base(sc, golden_path)
    report.update({
        "E1": e1,
        "eigenvalues": [float(v) for v in res.eigenvalues],
        "below_threshold": res.below_threshold,
        "confirmed": res.confirmed,
        "convergence_record": res.convergence_record,
        "certificate": certificate,
        "certificate_error": cert_error,
        "eigs_csv": f"{sc.name}_eigs.csv",
    })
    _write_json(outdir / f"{sc.name}_bound_states.json", report)
    return report


def run_all(sc: Scenario, outdir: Path, golden_path=None) -> tuple[dict, int]:
    threshold = run_threshold(sc, outdir, golden_path)
    potential = run_potential(sc, outdir, golden_path)
    bound = run_bound_states(sc, outdir, golden_path)
    report = _report_base(sc, golden_path)
    report.update({
        "threshold": threshold,
        "potential": potential,
        "bound_states": bound,
    })
    _write_json(outdir / f"{sc.name}_report.json", report)
    code = 2 if potential["verdict"] == Verdict.INCONCLUSIVE.name else 0
    return report, code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wgsurf",
        description="Spectral pipeline for waveguide-shaped surfaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("threshold", "potential", "bound-states", "all"):
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True,
                       help="path to a scenario JSON file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--n-t", type=int, default=None,
                       help="override transverse grid size")
        p.add_argument("--n-x", type=int, default=None,
                       help="override longitudinal grid size")
        p.add_argument("--L", type=float, default=None,
                       help="override final strip half-length")
        p.add_argument("--golden", default=None,
                       help="path to an alternate golden-value file")

    args = parser.parse_args(argv)
    try:
        overrides = {"n_t": args.n_t, "n_x": args.n_x}
        if args.L is not None:
            overrides["L_list"] = [args.L]
        sc = load_scenario(args.scenario, overrides)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)

        if args.command == "threshold":
            run_threshold(sc, outdir, args.golden)
            return 0
        if args.command == "potential":
            report = run_potential(sc, outdir, args.golden)
            return 2 if report["verdict"] == Verdict.INCONCLUSIVE.name else 0
        if args.command == "bound-states":
            run_bound_states(sc, outdir, args.golden)
            return 0
        report, code = run_all(sc, outdir, args.golden)
        return code
    except WgsurfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

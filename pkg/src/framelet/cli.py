"""Command-line front end.

Exit codes: 0 all checks passed, 2 usage or input error, 3 a check
failed, 4 I/O or format error.  ``FRAMELET_THREADS`` caps FFT threads.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .directional import build_directional_family_2d, directional_count, radial_pair
from .errors import CheckFailed, FormatError, FrameletError, InputError
from .filterbank import (
    derive_masks,
    haar_bank,
    oep_residuals,
    polyphase_identity_residual,
    refinement_residual,
)
from .generators import calderon_residual, construct_phi, construct_psi
from .grid import ConditionReport, FrequencyGrid
from .lattice import (
    analyze_dilation,
    build_adapted_norm,
    certify_lattice_conditions,
    choose_support_radius,
    coset_representatives,
    format_matrix,
)
from .transform import CoefficientPyramid, analyze, make_plan, pr_residual, synthesize
from .verify import (
    bracket_product_oracle,
    directional_system,
    dual_frame_condition_residuals,
    mra_consistency_residual,
    oracle_suite,
    stationary_system,
)

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_IO = 0, 2, 3, 4
DERIVED_KEYS = ("c", "dim", "files", "version", "bands", "J", "J_prime", "shape", "complex")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment, serialized as ``key=value`` lines."""

    kind: str = "stationary"
    matrix: str = "2,0;0,2"
    lambda0: float = 0.8
    eps: float | None = None
    grid: int = 512
    levels: str = "0:4"
    m: int = 4
    rho: float = 0.5
    eps_angular: float | None = None
    tol: float = 1e-12
    family: str = "isotropic"

    def __post_init__(self):
        if self.kind not in ("stationary", "directional", "transform"):
            raise InputError(f"kind must be stationary, directional or transform, got {self.kind!r}")
        if not 0.0 < self.lambda0 < 1.0:
            raise InputError("lambda0 must lie in (0, 1)")
        if self.eps is not None and not self.eps > 0:
            raise InputError("eps must be positive")
        if not 8 <= self.grid <= 8192:
            raise InputError("grid must lie in [8, 8192]")
        if not 1 <= self.m <= 1024:
            raise InputError("m must lie in [1, 1024]")
        if not 0.0 <= self.rho < 1.0:
            raise InputError("rho must lie in [0, 1)")
        if self.eps_angular is not None and not self.eps_angular > 0:
            raise InputError("eps_angular must be positive")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.family not in ("isotropic", "directional"):
            raise InputError(f"unknown family {self.family!r}")
        parse_levels(self.levels)

    @classmethod
    def keys(cls) -> tuple:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        """Build from string values; derived output keys are ignored.

        Raises
        ------
        FormatError
            On unknown keys.
        InputError
            On unparsable or out-of-range values.
        """
        unknown = set(raw) - set(cls.keys()) - set(DERIVED_KEYS)
        if unknown:
            raise FormatError(f"unknown keys: {', '.join(sorted(unknown))}")
        kw = {}
        for f in fields(cls):
            if f.name not in raw:
                continue
            text = raw[f.name]
            try:
                if f.name in ("eps", "eps_angular"):
                    kw[f.name] = None if text in ("", "none", "None") else float(text)
                elif f.name in ("lambda0", "rho", "tol"):
                    kw[f.name] = float(text)
                elif f.name in ("grid", "m"):
                    kw[f.name] = int(text)
                else:
                    kw[f.name] = text
            except ValueError as exc:
                raise InputError(f"bad value for {f.name}: {text!r}") from exc
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_mapping(io.read_manifest(path))

    def entries(self) -> dict:
        return {k: ("none" if v is None else v) for k, v in asdict(self).items()}


def parse_levels(text: str) -> list:
    """``"a:b"`` (inclusive) or a single integer."""
    try:
        if ":" in text:
            a, b = (int(v) for v in text.split(":"))
        else:
            a = b = int(text)
    except ValueError as exc:
        raise InputError(f"bad level range {text!r}") from exc
    if b < a:
        raise InputError(f"empty level range {text!r}")
    return list(range(a, b + 1))


def _dim_of(matrix: str) -> int:
    return analyze_dilation(matrix).dim


def _cube(cfg: ExperimentConfig, dim: int) -> FrequencyGrid:
    return FrequencyGrid.cube(cfg.grid, dim)


def _emit(reports: Sequence[ConditionReport], out: Path | None, name: str = "report.csv") -> int:
    text = io.format_report(reports)
    sys.stdout.write(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        io._write_bytes(out / name, text.encode())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def _out_dir(path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise FormatError(f"cannot create {p}: {exc}") from exc
    return p


# ---------------------------------------------------------------- systems

def _stationary(cfg: ExperimentConfig):
    phi = construct_phi(cfg.matrix, cfg.lambda0, cfg.eps)
    return phi, construct_psi(phi)


def _system(cfg: ExperimentConfig):
    if cfg.kind == "directional":
        return directional_system(cfg.m, cfg.rho, cfg.eps_angular, cfg.lambda0)
    phi, psi = _stationary(cfg)
    return stationary_system(phi, psi)


# ---------------------------------------------------------------- commands

def cmd_construct(args) -> int:
    cfg = _config(args, kind="stationary")
    out = _out_dir(args.out)
    phi, psi = _stationary(cfg)
    grid = _cube(cfg, phi.dim)
    x = grid.points()
    io.write_grid(out / "phi.frmg", phi(x), grid)
    io.write_grid(out / "psi.frmg", psi(x), grid)
    entries = cfg.entries()
    entries.update(c=repr(phi.c), dim=phi.dim, files="phi.frmg psi.frmg", version=1)
    io.write_manifest(out / "manifest", entries)
    return _emit([calderon_residual(phi, psi, grid, tol=cfg.tol)], out)


def cmd_directional(args) -> int:
    cfg = _config(args, kind="directional")
    out = _out_dir(args.out)
    grid = _cube(cfg, 2)
    radial = radial_pair(cfg.lambda0)
    reports = []
    for j in parse_levels(cfg.levels):
        fam = build_directional_family_2d(cfg.m, cfg.rho, j, cfg.eps_angular, radial)
        expected = directional_count(cfg.m, cfg.rho, j)
        reports.append(ConditionReport(f"count[j={j}]", float(abs(fam.count - expected)), 0.0, 1,
                                       0.0, fam.count == expected))
        reports.append(ConditionReport.from_residuals(
            f"split[j={j}]", fam.split_residual(grid), cfg.tol))
        if args.save:
            x = grid.points()
            for ell, mem in enumerate(fam.members):
                io.write_grid(out / f"member_j{j}_l{ell}.frmg", mem(x), grid)
    entries = cfg.entries()
    entries.update(dim=2, version=1)
    io.write_manifest(out / "manifest", entries)
    return _emit(reports, out)


def cmd_filterbank(args) -> int:
    if args.haar:
        grid = FrequencyGrid.cube(args.grid, 1)
        rep = polyphase_identity_residual(haar_bank(), grid, tol=args.tol or 1e-14)
        reports = [rep] + oep_residuals(haar_bank(), None, grid, tol=args.tol or 1e-12)
        return _emit(reports, _out_dir(args.out) if args.out else None)
    cfg = _config(args)
    out = _out_dir(args.out) if args.out else None
    return _emit(_filterbank_reports(cfg), out)


def _filterbank_reports(cfg: ExperimentConfig) -> list:
    reports = []
    if cfg.kind == "directional":
        radial = radial_pair(cfg.lambda0)
        grid = _cube(cfg, 2)
        for j in parse_levels(cfg.levels):
            fam = build_directional_family_2d(cfg.m, cfg.rho, j, cfg.eps_angular, radial)
            bank = derive_masks(fam.phi, fam, level=j)
            reports.extend(_bank_reports(bank, fam.phi, fam.members, grid, cfg.tol, f"j={j}"))
        return reports
    phi, psi = _stationary(cfg)
    bank = derive_masks(phi, psi)
    return _bank_reports(bank, phi, [psi], _cube(cfg, phi.dim), cfg.tol, "")


def _bank_reports(bank, phi, children, grid, tol, tag) -> list:
    sfx = f"[{tag}]" if tag else ""
    reports = [refinement_residual(bank.lowpass, phi, phi, grid, tol=max(tol, 1e-13))]
    for b, child in zip(bank.highpass, children):
        reports.append(refinement_residual(b, phi, child, grid, tol=max(tol, 1e-13)))
    reports += oep_residuals(bank, None, grid, tol=tol)
    return [ConditionReport(f"{r.condition_id}{sfx}", r.max_residual, r.mean_residual, r.points,
                            r.tolerance, r.passed) for r in reports]


def cmd_verify(args) -> int:
    cfg = _config(args)
    out = Path(args.out) if args.out else Path(args.manifest).parent if args.manifest else None
    system = _system(cfg)
    levels = parse_levels(cfg.levels)
    grid = _cube(cfg, system.dim)
    what = args.what
    if what == "tight":
        reports = dual_frame_condition_residuals(system, grid, levels, "tight-simple", tol=cfg.tol)
    elif what == "dual":
        reports = dual_frame_condition_residuals(system, grid, levels, args.mode, tol=cfg.tol)
    elif what == "oep":
        reports = _filterbank_reports(cfg)
    elif what == "mra":
        reports = []
        for j in levels:
            rep = mra_consistency_residual(system.phi_at(j), system.wavelets(j),
                                           system.phi_at(j + 1),
                                           (system.level_matrix(j), system.level_matrix(j + 1)),
                                           grid, cfg.tol)
            reports.append(ConditionReport(f"cond:mra[j={j}]", rep.max_residual, rep.mean_residual,
                                           rep.points, rep.tolerance, rep.passed))
    else:
        reports = _oracle_reports(system, cfg, args.oracle_tol)
    return _emit(reports, out)


def _oracle_reports(system, cfg, tol) -> list:
    d = system.dim
    mt = system.dilation.entries.T
    phi = system.phi[0]
    psi = system.wavelets(0)[0]
    reports = []
    for uname, U in (("I", np.eye(d)), ("MT", mt)):
        for gname, gen in (("phi", phi), ("psi", psi)):
            for fname, f, g in oracle_suite(d):
                r = bracket_product_oracle(f, g, gen, gen, U)
                reports.append(ConditionReport(f"oracle[U={uname},{gname},{fname}]", r.diff, r.diff,
                                               1, tol, r.diff <= tol))
    return reports


def _load_samples(args) -> np.ndarray:
    if args.image:
        return io.read_pgm(args.image)
    values, _ = io.read_grid(args.input)
    return values


def _plan_for(samples: np.ndarray, args):
    if samples.ndim not in (1, 2) or len(set(samples.shape)) != 1:
        raise InputError(f"transform needs a square grid, got shape {samples.shape}")
    return make_plan(samples.shape[0], args.levels, args.family, dim=samples.ndim, m=args.m,
                     rho=args.rho, eps=args.eps_angular, lambda0=args.lambda0)


def cmd_transform(args) -> int:
    if args.action == "synthesize":
        raw = io.read_manifest(args.manifest)
        base = Path(args.manifest).parent
        cfg = ExperimentConfig.from_mapping(raw)
        n = int(raw["shape"].split("x")[0])
        dim = raw["shape"].count("x") + 1
        plan = make_plan(n, int(raw["levels"]), cfg.family, dim=dim, m=cfg.m, rho=cfg.rho,
                         eps=cfg.eps_angular, lambda0=cfg.lambda0)
        names = raw["files"].split()
        if len(names) != plan.band_count:
            raise FormatError(f"manifest lists {len(names)} bands, plan has {plan.band_count}")
        bands = tuple(io.read_grid(base / nm)[0] for nm in names)
        y = synthesize(CoefficientPyramid(plan, bands))
        if raw.get("complex", "true") == "false":
            y = y.real
        io.write_grid(args.out, y)
        if args.pgm:
            io.write_pgm(args.pgm, y.real)
        return EXIT_OK
    samples = _load_samples(args)
    plan = _plan_for(samples, args)
    if args.action == "roundtrip":
        res = pr_residual(samples, plan)
        tol = args.tol if args.tol is not None else 1e-10
        rep = ConditionReport("transform:pr", res, res, samples.size, tol, res <= tol)
        print(f"pr_residual={res:.6e} bands={plan.band_count} J_prime={plan.J_prime} "
              f"tightness={plan.tightness_residual:.3e}")
        return _emit([rep], _out_dir(args.out) if args.out else None)
    out = _out_dir(args.out)
    pyr = analyze(samples, plan)
    names = []
    for label, band in zip(plan.labels, pyr.bands):
        nm = "lowpass.frmg" if label == "lowpass" else f"band_j{label[0]}_l{label[1]}.frmg"
        io.write_grid(out / nm, band)
        names.append(nm)
    cfg = ExperimentConfig(kind="transform", lambda0=args.lambda0, m=args.m, rho=args.rho,
                           eps_angular=args.eps_angular, family=args.family,
                           levels=str(args.levels))
    entries = cfg.entries()
    entries.update(files=" ".join(names), shape="x".join(str(s) for s in samples.shape),
                   bands=plan.band_count, J=plan.J, J_prime=plan.J_prime,
                   complex=str(bool(np.iscomplexobj(samples))).lower(), version=1)
    io.write_manifest(out / "manifest", entries)
    print(f"bands={plan.band_count} J_prime={plan.J_prime} energy_ratio="
          f"{pyr.energy() / max(float(np.sum(np.abs(samples) ** 2)), 1e-300):.12f}")
    return EXIT_OK


def cmd_lattice(args) -> int:
    m = analyze_dilation(args.matrix)
    lines = [
        f"matrix={format_matrix(m.entries)}",
        f"dim={m.dim}",
        f"det_abs={m.det_abs:.12g}",
        "eigen_moduli=" + " ".join(f"{v:.12g}" for v in sorted(m.eigen_moduli)),
        f"expansive={str(m.expansive).lower()}",
        f"integer={str(m.is_integer).lower()}",
    ]
    reports = []
    if m.expansive:
        norm = build_adapted_norm(m.T, args.eps)
        lines += [f"adapted_norm_method={norm.method}",
                  f"lower_factor={norm.lower_factor:.12g}",
                  f"upper_factor={norm.upper_factor:.12g}",
                  f"support_radius_c={choose_support_radius(m, args.lambda0):.12g}"]
        if m.is_integer:
            cos = coset_representatives(m)
            lines.append("gamma=" + " ".join("(" + ",".join(f"{v:g}" for v in g) + ")" for g in cos.gamma))
            lines.append("omega=" + " ".join("(" + ",".join(f"{v:g}" for v in w) + ")" for w in cos.omega))
            cert = certify_lattice_conditions(m, args.J, args.radius, args.jmax)
            lines += [f"min_separation={cert.min_separation:.12g}",
                      f"contraction_certified={str(cert.contraction_certified).lower()}"]
            reports.append(ConditionReport("lattice:contraction", 0.0 if cert.contraction_certified else 1.0,
                                           0.0, len(cert.points), 0.0, cert.contraction_certified))
    sys.stdout.write("".join(line + "\n" for line in lines))
    if args.out:
        io._write_bytes(_out_dir(args.out) / "lattice.txt", "".join(l + "\n" for l in lines).encode())
    if not m.expansive:
        return EXIT_CHECK
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


# ---------------------------------------------------------------- parser

def _config(args, kind: str | None = None) -> ExperimentConfig:
    """Config from ``--manifest``/``--config`` with explicit flags on top."""
    base = {}
    src = getattr(args, "manifest", None) or getattr(args, "config", None)
    if src:
        base = io.read_manifest(src)
    if kind is not None:
        base["kind"] = kind
    for key in ExperimentConfig.keys():
        v = getattr(args, key, None)
        if v is not None:
            base[key] = str(v)
    return ExperimentConfig.from_mapping(base)


def _add_common(p, matrix=True, grid=True, levels=False):
    p.add_argument("--config", help="key=value experiment file")
    if matrix:
        p.add_argument("--matrix", help='dilation, e.g. "2,0;0,2"')
        p.add_argument("--lambda0", type=float)
        p.add_argument("--eps", type=float)
    if grid:
        p.add_argument("--grid", type=int, help="points per axis")
    if levels:
        p.add_argument("--levels", help='inclusive range "a:b"')
    p.add_argument("--tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="framelet", description="Frequency-domain tight wavelet frames.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="sample phi and psi on a grid")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("directional", help="build directional families")
    _add_common(p, matrix=False, levels=True)
    p.add_argument("--lambda0", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--eps-angular", dest="eps_angular", type=float)
    p.add_argument("--save", action="store_true", help="write member samples")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_directional)

    p = sub.add_parser("filterbank", help="derive masks and check them")
    _add_common(p, levels=True)
    p.add_argument("--manifest")
    p.add_argument("--haar", action="store_true", help="check the Haar bank instead")
    p.add_argument("--out")
    p.set_defaults(func=cmd_filterbank)

    p = sub.add_parser("verify", help="frame-condition checks")
    p.add_argument("what", choices=["tight", "dual", "oep", "mra", "oracle"])
    _add_common(p, levels=True)
    p.add_argument("--manifest")
    p.add_argument("--mode", choices=["stationary", "nonstationary"], default="nonstationary")
    p.add_argument("--oracle-tol", dest="oracle_tol", type=float, default=1e-8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("transform", help="discrete frame transform")
    p.add_argument("action", choices=["analyze", "synthesize", "roundtrip"])
    src = p.add_mutually_exclusive_group()
    src.add_argument("--image", help="PGM input")
    src.add_argument("--input", help=".frmg input")
    p.add_argument("--manifest", help="analysis manifest (synthesize)")
    p.add_argument("--family", choices=["isotropic", "directional"], default="isotropic")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--eps-angular", dest="eps_angular", type=float)
    p.add_argument("--lambda0", type=float, default=0.8)
    p.add_argument("--tol", type=float)
    p.add_argument("--pgm", help="also write a PGM (synthesize)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("lattice", help="dilation matrix analysis")
    p.add_argument("--matrix", required=True)
    p.add_argument("--lambda0", type=float, default=0.8)
    p.add_argument("--eps", type=float)
    p.add_argument("--J", type=int, default=0)
    p.add_argument("--radius", type=float, default=8.0)
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lattice)
    return ap


def _validate(args, parser):
    if args.command == "transform":
        if args.action == "synthesize":
            if not args.manifest or not args.out:
                parser.error("synthesize needs --manifest and --out")
        elif not (args.image or args.input):
            parser.error(f"{args.action} needs --image or --input")
        elif args.action == "analyze" and not args.out:
            parser.error("analyze needs --out")
    if args.command == "verify" and not (args.manifest or args.config or args.matrix):
        parser.error("verify needs --manifest, --config or --matrix")


def run_command(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (InputError, FrameletError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()

"""Command-line front end: scans, analyses, and property verification.

Subcommands: ``scan`` (energy-error over a step grid), ``analyze`` (one of
quad-errors, resonances, normal-form, modified-eq, processor, local-error),
and ``verify`` (property suites).  Every command writes a manifest with the
fully resolved configuration so outputs can be reproduced exactly.

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 resonance obstruction.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys as _sys
from pathlib import Path

import numpy as np

try:  # 3.11+ stdlib, tomli backport otherwise
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml

from . import __version__
from .algebra import coeffmap_to_json
from .extended import word_frequency
from .splitting import (
    NAMED_SCHEMES,
    SplittingScheme,
    detect_numerical_resonances,
    local_error_coefficients,
    quadrature_error,
    scaled_exact_value,
    splitting_coefficients,
)
from .systems import (
    PRESETS,
    MechanicalSystem,
    build_scan_grid,
    energy_error_scan,
    unit_mode_letters,
)
from .transforms import ResonanceObstruction, modified_equation, normal_form, processor
from .verify import run_suite
from .words import Word

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_RESONANCE = 3


class ConfigError(Exception):
    pass


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text()
    if p.suffix.lower() == ".json":
        cfg = json.loads(text)
    else:
        try:
            cfg = _toml.loads(text)
        except Exception as exc:
            raise ConfigError(f"could not parse config {path}: {exc}") from exc
    # the verbatim text rides along so the manifest documents the precision
    # of every number exactly as written
    cfg["_raw_config"] = text
    return cfg


def resolve_scheme(cfg: dict) -> SplittingScheme:
    name = cfg.get("scheme", "strang")
    if isinstance(name, dict):
        try:
            return SplittingScheme(tuple(name["a"]), tuple(name["b"]), name="custom")
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad scheme spec: {exc}") from exc
    if name not in NAMED_SCHEMES:
        raise ConfigError(f"unknown scheme {name!r}; known: {sorted(NAMED_SCHEMES)}")
    return NAMED_SCHEMES[name]


def resolve_system(cfg: dict) -> MechanicalSystem:
    preset = cfg.get("system", "fpu5")
    if isinstance(preset, dict):
        return _system_from_spec(preset)
    if preset not in PRESETS:
        raise ConfigError(f"unknown system preset {preset!r}; known: {sorted(PRESETS)}")
    kwargs = cfg.get("system_args", {})
    try:
        return PRESETS[preset](**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad system arguments: {exc}") from exc


def _system_from_spec(spec: dict) -> MechanicalSystem:
    """Custom system from a config table: omega (+basis), potential, p0, q0.

    The potential is a list of (exponent-vector, re, im) triples over the
    variables (p_1..p_d, q_1..q_d); momentum exponents must be zero.
    """
    from .extended import FrequencySpec
    from .poly import Chart, PolyObservable
    try:
        freq = FrequencySpec.from_config(spec)
        chart = Chart("pq", tuple(float(w) for w in freq.omega))
        potential = PolyObservable(
            chart, {tuple(e): complex(re, im) for e, re, im in spec["potential"]})
        return MechanicalSystem(freq, potential,
                                np.asarray(spec["p0"], dtype=float),
                                np.asarray(spec["q0"], dtype=float),
                                name=str(spec.get("name", "custom")))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad custom system spec: {exc}") from exc


def merge_flags(cfg: dict, args: argparse.Namespace) -> dict:
    out = dict(cfg)
    for key in ("system", "scheme", "N", "h", "h_min", "h_max", "h_points",
                "T", "tol", "seed", "max_letters"):
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def write_manifest(outdir: Path, command: str, cfg: dict, outputs: list[str]):
    manifest = {
        "tool": "wordseries",
        "version": __version__,
        "command": command,
        "config": cfg,
        "outputs": outputs,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def _word_key(w: Word) -> str:
    return ";".join(",".join(str(i) for i in a) for a in w)


def cmd_scan(args) -> int:
    cfg = merge_flags(load_config(args.config), args)
    sys_ = resolve_system(cfg)
    scheme = resolve_scheme(cfg)
    h_min = float(cfg.get("h_min", 1e-3))
    h_max = float(cfg.get("h_max", 1.0))
    n_pts = int(cfg.get("h_points", 200))
    T = float(cfg.get("T", 50.0))
    if not (0 < h_min < h_max) or n_pts < 2 or T <= 0:
        print("invalid scan parameters", file=_sys.stderr)
        return EXIT_CONFIG
    rep0 = detect_numerical_resonances(sys_.freq, unit_mode_letters(sys_.freq), 1,
                                       h_range=(h_min, h_max))
    grid = build_scan_grid(h_min, h_max, n_pts,
                           resonances=[e["h"] for e in rep0["resonances"]])
    result = energy_error_scan(sys_, scheme, grid, T)
    outdir = Path(cfg.get("out", args.out or "."))
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "energy_error.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["h", "steps", "partial_step",
                                                "energy_error", "nearest_resonance_h",
                                                "resonance_distance"])
        writer.writeheader()
        for row in result["rows"]:
            writer.writerow({k: repr(v) if isinstance(v, float) else v
                             for k, v in row.items()})
    res_path = outdir / "resonances.json"
    res_path.write_text(json.dumps(result["resonances"], indent=2))
    write_manifest(outdir, "scan", cfg, [csv_path.name, res_path.name])
    print(f"wrote {csv_path} ({len(result['rows'])} rows) and {res_path}")
    return EXIT_OK


def _analysis_alphabet(sys_: MechanicalSystem, cfg: dict) -> tuple:
    max_letters = cfg.get("max_letters")
    alphabet = sys_.modes().alphabet()
    if max_letters is not None and len(alphabet) > int(max_letters):
        # keep the lowest-order modes, deterministically
        alphabet = tuple(sorted(alphabet, key=lambda k: (sum(abs(x) for x in k), k))
                         [: int(max_letters)])
    return alphabet


def cmd_analyze(args) -> int:
    cfg = merge_flags(load_config(args.config), args)
    try:
        sys_ = resolve_system(cfg)
        scheme = resolve_scheme(cfg)
    except ConfigError as exc:
        print(str(exc), file=_sys.stderr)
        return EXIT_CONFIG
    N = int(cfg.get("N", 2))
    h = float(cfg.get("h", 0.1))
    rtol = float(cfg.get("tol", 1e-9))
    outdir = Path(cfg.get("out", args.out or "."))
    outdir.mkdir(parents=True, exist_ok=True)
    alphabet = _analysis_alphabet(sys_, cfg)
    freq = sys_.freq
    what = args.what
    outputs: list[str] = []
    try:
        if what == "quad-errors":
            from .words import all_words
            path = outdir / "quad_errors.csv"
            with path.open("w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(["word", "n", "h", "mu", "A_re", "A_im",
                             "Atilde_re", "Atilde_im", "err_re", "err_im"])
                for w in all_words(alphabet, N):
                    if len(w) == 0:
                        continue
                    mu, _ = word_frequency(w, freq)
                    A = scaled_exact_value(freq, w, h)
                    err = quadrature_error(scheme, freq, w, h)
                    At = A + err
                    wr.writerow([_word_key(w), len(w), repr(h), repr(mu),
                                 repr(A.real), repr(A.imag),
                                 repr(At.real), repr(At.imag),
                                 repr(err.real), repr(err.imag)])
            outputs.append(path.name)
        elif what == "resonances":
            h_min = float(cfg.get("h_min", 1e-3))
            h_max = float(cfg.get("h_max", 1.0))
            rep = detect_numerical_resonances(freq, alphabet, N, h_range=(h_min, h_max))
            path = outdir / "resonances.json"
            path.write_text(json.dumps(rep, indent=2))
            outputs.append(path.name)
        elif what == "normal-form":
            from .algebra import perturbation_element
            beta = perturbation_element(alphabet, N)
            nf = normal_form(beta, freq)
            path = outdir / "normal_form.json"
            path.write_text(json.dumps({
                "residual": nf.residual,
                "kappa": coeffmap_to_json(nf.kappa),
                "beta_hat": coeffmap_to_json(nf.beta_hat),
                "stage_generators": {str(n): coeffmap_to_json(lam)
                                     for n, lam in nf.stage_generators.items()},
            }, indent=2))
            outputs.append(path.name)
            print(f"normal-form residual {nf.residual:.3e}")
        elif what == "modified-eq":
            me = modified_equation(scheme, freq, alphabet, N, h, resonance_rtol=rtol)
            path = outdir / "modified_equation.json"
            rows = []
            for w, c in me.beta_tilde.sorted_items():
                mu, _ = word_frequency(w, freq)
                rows.append({"word": _word_key(w), "n": len(w), "mu": mu,
                             "re": c.real, "im": c.imag})
            path.write_text(json.dumps({"h": h, "order": me.n_max,
                                        "diagnostics": me.diagnostics,
                                        "beta_tilde": rows}, indent=2))
            outputs.append(path.name)
            for k in alphabet:
                mu, zero = word_frequency(Word((k,)), freq)
                if not zero:
                    val = me.beta_tilde[Word((k,))]
                    print(f"beta~_{k} = {val:.12g} (mu = {mu:.6g})")
                    break
        elif what == "processor":
            res = processor(scheme, freq, alphabet, N, h,
                            mode=str(cfg.get("mode", "full")), resonance_rtol=rtol)
            path = outdir / "processor.json"
            path.write_text(json.dumps({
                "mode": res.mode,
                "kappa": coeffmap_to_json(res.kappa),
                "processed_errors": [{"word": _word_key(w), "re": e.real, "im": e.imag}
                                     for w, e in sorted(res.error_table.items(),
                                                        key=lambda t: t[0].sort_key)],
            }, indent=2))
            outputs.append(path.name)
        elif what == "local-error":
            ext = local_error_coefficients(scheme, freq, alphabet, N, h)
            path = outdir / "local_error.csv"
            with path.open("w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(["word", "n", "mu", "err_re", "err_im"])
                for w in sorted(set(ext.delta.entries), key=lambda w: w.sort_key):
                    mu, _ = word_frequency(w, freq)
                    c = ext.delta[w]
                    wr.writerow([_word_key(w), len(w), repr(mu), repr(c.real), repr(c.imag)])
            outputs.append(path.name)
        else:  # pragma: no cover - argparse restricts choices
            return EXIT_CONFIG
    except ResonanceObstruction as exc:
        report = {"error": "resonance", "word": _word_key(exc.word),
                  "mu": exc.mu, "h": exc.h, "two_pi_multiple": exc.j}
        path = outdir / "resonance_obstruction.json"
        path.write_text(json.dumps(report, indent=2))
        print(f"resonance obstruction: {exc}", file=_sys.stderr)
        write_manifest(outdir, f"analyze:{what}", cfg, [path.name])
        return EXIT_RESONANCE
    write_manifest(outdir, f"analyze:{what}", cfg, outputs)
    print(f"wrote {', '.join(outputs)} in {outdir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    ok, checks = run_suite(args.level, seed=int(args.seed or 0))
    width = max(len(name) for name, _, _ in checks)
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        print(f"{name:<{width}}  {status}  {detail}")
    print(f"{'overall':<{width}}  {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wordseries",
                                 description="word-series analysis of splitting integrators")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML or JSON configuration file")
        p.add_argument("--system", help="system preset name")
        p.add_argument("--scheme", help="named splitting scheme")
        p.add_argument("--N", type=int, help="word-length truncation")
        p.add_argument("--h", type=float, help="step size")
        p.add_argument("--h-min", dest="h_min", type=float)
        p.add_argument("--h-max", dest="h_max", type=float)
        p.add_argument("--h-points", dest="h_points", type=int)
        p.add_argument("--T", type=float, help="final time")
        p.add_argument("--tol", type=float, help="tolerance override")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--max-letters", dest="max_letters", type=int,
                       help="cap the analysis alphabet size")
        p.add_argument("--out", help="output directory")

    ps = sub.add_parser("scan", help="energy-error scan over a step-size grid")
    common(ps)
    ps.set_defaults(func=cmd_scan)

    pa = sub.add_parser("analyze", help="coefficient-level analyses")
    pa.add_argument("what", choices=["quad-errors", "resonances", "normal-form",
                                     "modified-eq", "processor", "local-error"])
    common(pa)
    pa.set_defaults(func=cmd_analyze)

    pv = sub.add_parser("verify", help="run the property suites")
    pv.add_argument("level", choices=["fast", "full"], nargs="?", default="fast")
    pv.add_argument("--seed", type=int, default=0)
    pv.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=_sys.stderr)
        return EXIT_CONFIG
    except ResonanceObstruction as exc:
        print(f"resonance obstruction: {exc}", file=_sys.stderr)
        return EXIT_RESONANCE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())

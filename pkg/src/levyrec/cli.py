"""Command line front end.

    levyrec classify <config>            analytic verdicts (+ Monte Carlo if listed)
    levyrec simulate <config>            ball probabilities and the return exponent
    levyrec compare  <configA> <configB> tail domination A >= B and verdict transfer
    levyrec perturb  <configA> <configB> Levy-measure distance and equivalence

Exit status: 0 for any verdict (Inconclusive included), 1 on a
Recurrent/Transient contradiction, 2 on configuration or analysis errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from ._accel import backend_name, configure_threads
from .config import RunConfig, load_config
from .core import SUP, ProcessFamily, envelope_ball_tail, radial_symbol_profile
from .criteria import (ClassificationReport, Verdict, classify_by_tails, classify_chung_fuchs, classify_regvar,
                       classify_sufficient_p5, reconcile)
from .errors import ConfigError, LevyRecError
from .montecarlo import estimate_ball_probability, fit_return_exponent, write_csv
from .transforms import PlaneRotation, perturbation_equivalent, tail_dominates, transfer_classification

log = logging.getLogger("levyrec")

EXIT_OK, EXIT_CONTRADICTION, EXIT_ERROR = 0, 1, 2

_ANALYTIC = {"chung_fuchs": classify_chung_fuchs, "tails": classify_by_tails, "p5": classify_sufficient_p5,
             "regvar": classify_regvar}


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _versions():
    import yaml
    from . import _accel
    return {"levyrec": __version__, "numpy": np.__version__,
            "numba": _accel.numba.__version__ if _accel.numba else None, "pyyaml": yaml.__version__,
            "backend": backend_name()}


def _write_profile(path: Path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "value"])
        for r, v in rows:
            w.writerow([repr(float(r)), repr(float(v))])


def write_profiles(family: ProcessFamily, out: Path, points: int = 61):
    """Sup-envelope symbol profile and ball-tail profile on [1e-3, 1e3]."""
    rhos = np.geomspace(1e-3, 1e3, points)
    files = {}
    symbol = [(r, radial_symbol_profile(family, SUP, float(r))) for r in rhos]
    files["symbol"] = out / f"{family.name}_symbol.csv"
    _write_profile(files["symbol"], symbol)
    if family.has_measure():
        tail = [(r, envelope_ball_tail(family, SUP, float(r))) for r in rhos]
        files["tail"] = out / f"{family.name}_tail.csv"
        _write_profile(files["tail"], tail)
    # file names only, so the report does not depend on where --out points
    return {k: v.name for k, v in files.items()}


def run_analyses(cfg: RunConfig, seed: Optional[int] = None, out: Optional[Path] = None):
    """Run the analytic (and Monte Carlo) analyses of one config; returns (report, errors, extras)."""
    family = cfg.family()
    ccfg = cfg.criteria_config()
    verdicts, errors, extras = [], [], {}
    for name in cfg.analyses:
        if name in _ANALYTIC:
            log.info("%s: running %s", cfg.name, name)
            try:
                verdicts.append(_ANALYTIC[name](family, ccfg))
            except LevyRecError as exc:
                errors.append({"analysis": name, "error": type(exc).__name__, "message": str(exc)})
    empirical = None
    if "montecarlo" in cfg.analyses:
        try:
            empirical = _simulate(cfg, family, seed, out)
            extras["montecarlo"] = empirical
        except LevyRecError as exc:
            errors.append({"analysis": "montecarlo", "error": type(exc).__name__, "message": str(exc)})
    skipped = [a for a in cfg.analyses if a in ("perturb", "compare")]
    if skipped:
        extras["skipped"] = [f"{a}: run through the '{a}' subcommand with a second config" for a in skipped]
    report = reconcile(verdicts, empirical) if verdicts else None
    return family, report, errors, extras


def _simulate(cfg: RunConfig, family, seed, out):
    scfg = cfg.sim_config(seed)
    log.info("%s: simulating %d paths", cfg.name, scfg.path_count)
    est = estimate_ball_probability(family, scfg)
    result = {"estimate": est.as_dict(), "config": {"paths": scfg.path_count, "seed": scfg.seed,
                                                    "small_jump_cutoff": scfg.small_jump_cutoff,
                                                    "probe_radius": scfg.probe_radius, "step": scfg.step}}
    try:
        fit = fit_return_exponent(est, band=float(cfg.montecarlo.get("band", 0.15)),
                                  p_max=float(cfg.montecarlo.get("p_max", 0.05)))
        result.update(fit.as_dict())
    except LevyRecError as exc:
        result.update({"verdict": "Unavailable", "fit_error": str(exc)})
    if out is not None:
        path = out / f"{family.name}_occupation.csv"
        write_csv(est, path)
        result["csv"] = path.name
    return result


def _document(command, cfgs, reports, errors, extras, seed):
    doc = {"command": command, "versions": _versions(), "seed": seed,
           "configs": [c.as_dict() for c in cfgs], "errors": errors}
    doc.update(reports)
    doc.update(extras)
    return _clean(doc)


def _emit(doc, out: Optional[Path], stem: str):
    text = json.dumps(doc, indent=2, sort_keys=False)
    if out is None:
        print(text)
    else:
        (out / f"{stem}_report.json").write_text(text + "\n")
        print(f"report written to {out / f'{stem}_report.json'}: verdict {doc.get('verdict', '-')}")


def _report_part(report: Optional[ClassificationReport]):
    if report is None:
        return {"verdict": "Inconclusive", "report": None}
    return {"verdict": report.verdict.value, "contradiction": report.contradiction, "report": report.as_dict()}


def _status(errors, contradiction=False):
    if contradiction:
        return EXIT_CONTRADICTION
    return EXIT_ERROR if errors else EXIT_OK


def cmd_classify(args, out):
    cfg = _load(args.config, args.seed)
    family, report, errors, extras = run_analyses(cfg, args.seed, out)
    if out is not None:
        extras["profiles"] = write_profiles(family, out)
    doc = _document("classify", [cfg], _report_part(report), errors, extras, cfg.seed)
    _emit(doc, out, family.name)
    return _status(errors, bool(report and report.contradiction))


def cmd_simulate(args, out):
    cfg = _load(args.config, args.seed)
    if not cfg.montecarlo:
        raise ConfigError(f"{cfg.source}: field 'montecarlo': simulate needs a montecarlo block")
    family = cfg.family()
    result = _simulate(cfg, family, args.seed, out)
    doc = _document("simulate", [cfg], {"verdict": result.get("verdict"), "montecarlo": result}, [], {}, cfg.seed)
    _emit(doc, out, family.name)
    return EXIT_OK


def _classify_pair(cfg_a, cfg_b, seed, out):
    fam_a, rep_a, err_a, _ = run_analyses(cfg_a, seed, out)
    fam_b, rep_b, err_b, _ = run_analyses(cfg_b, seed, out)
    return fam_a, fam_b, rep_a, rep_b, err_a + err_b


def cmd_compare(args, out):
    cfg_a, cfg_b = _load(args.config_a, args.seed), _load(args.config_b, args.seed)
    fam_a, fam_b, rep_a, rep_b, errors = _classify_pair(cfg_a, cfg_b, args.seed, out)
    opts = cfg_a.compare
    dom = tail_dominates(fam_a, fam_b, u0=float(opts.get("u0", 0.0)), mode=opts.get("mode", "BallTail"))
    transfers = []
    if rep_b is not None:
        transfers.append(transfer_classification(_summary(rep_b, cfg_b.name), dom, "transience", dominating=fam_a))
    if rep_a is not None:
        transfers.append(transfer_classification(_summary(rep_a, cfg_a.name), dom, "recurrence", dominating=fam_a))
    parts = {"verdict_a": _report_part(rep_a), "verdict_b": _report_part(rep_b), "domination": dom.as_dict(),
             "transfers": [t.as_dict() for t in transfers]}
    doc = _document("compare", [cfg_a, cfg_b], parts, errors, {}, cfg_a.seed)
    _emit(doc, out, f"{fam_a.name}_vs_{fam_b.name}")
    contra = any(r is not None and r.contradiction for r in (rep_a, rep_b))
    return _status(errors, contra)


def _summary(report: ClassificationReport, name: str) -> Verdict:
    decided = [v for v in report.verdicts if v.value is report.verdict]
    if decided:
        return decided[0]
    return Verdict(report.verdict, f"{name}:reconciled")


def cmd_perturb(args, out):
    cfg_a, cfg_b = _load(args.config_a, args.seed), _load(args.config_b, args.seed)
    fam_a, fam_b = cfg_a.family(), cfg_b.family()
    angle = float(cfg_a.compare.get("rotation", 0.0))
    pert = perturbation_equivalent(fam_a, fam_b, PlaneRotation(angle), cfg_a.criteria_config())
    errors = []
    parts = {"verdict": pert.conclusion, "perturbation": pert.as_dict()}
    if any(a in _ANALYTIC for a in cfg_a.analyses):
        _, rep_a, err_a, _ = run_analyses(cfg_a, args.seed, out)
        _, rep_b, err_b, _ = run_analyses(cfg_b, args.seed, out)
        errors = err_a + err_b
        parts.update({"verdict_a": _report_part(rep_a), "verdict_b": _report_part(rep_b)})
        decided = {r.verdict.value for r in (rep_a, rep_b) if r is not None} - {"Inconclusive"}
        if pert.conclusion != "NotEstablished" and len(decided) > 1:
            parts["warning"] = "equivalent processes received different verdicts"
            return _finish(parts, [cfg_a, cfg_b], errors, out, f"{fam_a.name}_perturb_{fam_b.name}",
                           EXIT_CONTRADICTION)
    return _finish(parts, [cfg_a, cfg_b], errors, out, f"{fam_a.name}_perturb_{fam_b.name}", _status(errors))


def _finish(doc_parts, cfgs, errors, out, stem, status):
    doc = _document("perturb", cfgs, doc_parts, errors, {}, cfgs[0].seed)
    _emit(doc, out, stem)
    return status


def _load(path, seed) -> RunConfig:
    cfg = load_config(path)
    if seed is not None:
        cfg.numeric = dict(cfg.numeric, seed=seed)
        if cfg.montecarlo:
            cfg.montecarlo = dict(cfg.montecarlo, seed=seed)
    return cfg


def build_parser():
    p = argparse.ArgumentParser(prog="levyrec", description="Recurrence/transience of planar radial Levy(-type) "
                                                            "processes")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="directory for the JSON report and CSV files")
    common.add_argument("--seed", type=int, default=None, help="override numeric.seed and montecarlo.seed")
    common.add_argument("--verbose", action="store_true", help="progress messages on stderr")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("classify", parents=[common], help="run the listed analyses on one process")
    c.add_argument("config")
    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo ball probabilities and return exponent")
    s.add_argument("config")
    for name, text in (("compare", "tail domination and verdict transfer"),
                       ("perturb", "Levy-measure distance and recurrence equivalence")):
        q = sub.add_parser(name, parents=[common], help=text)
        q.add_argument("config_a")
        q.add_argument("config_b")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = configure_threads()
    log.info("backend %s, %d thread(s)", backend_name(), threads)
    out = args.out
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    handler = {"classify": cmd_classify, "simulate": cmd_simulate, "compare": cmd_compare,
               "perturb": cmd_perturb}[args.command]
    try:
        return handler(args, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except LevyRecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""``unitalcap`` command line: analyze a channel, survey expanders, run property suites.

Exit codes: 0 success, 1 property violation, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import capacity_report, q_lower_lsd, zero_error_upper
from .channels import WeightOperator, apply, is_unital, tensor_power
from .config import RunConfig
from .errors import UnitalCapError
from .expanders import CSV_COLUMNS, SURVEY_ASCENT, ensemble_survey
from .io import channel_from_json, code_from_json, csv_text, dumps
from .norms import multiplicativity_report, output_2norm, output_2norm_tensor
from .recovery import check_lemma3, code_noise_channel, default_reference_state, petz_recovery
from .spectral import check_block_structure, second_singular_value
from .suites import SUITES, run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _meta(cfg: RunConfig) -> dict:
    return {"tool": "unitalcap", "version": __version__, "master_seed": cfg.master_seed}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _pi_family(ch, n: int) -> dict[str, WeightOperator]:
    """Weight operators swept for the zero-error bound."""
    D = ch.d_out ** n
    fam = {"identity": WeightOperator.identity(D)}
    out = apply(tensor_power(ch, n), np.eye(ch.d_in ** n) / ch.d_in ** n)
    w, v = np.linalg.eigh((out + out.conj().T) / 2)
    if w.min() > 1e-12:
        # scaled so Tr(Pi^2) matches the identity choice
        root = (v * np.sqrt(w)) @ v.conj().T
        root *= np.sqrt(D / np.trace(root @ root).real)
        fam["sqrt_output_of_maximally_mixed"] = WeightOperator(root)
    return fam


def cmd_analyze(args, cfg: RunConfig) -> int:
    ch = channel_from_json(Path(args.channel).read_text())
    opts = cfg.ascent()
    report = _meta(cfg)
    report["d_in"], report["d_out"], report["k"] = ch.d_in, ch.d_out, ch.k
    unital = ch.d_in == ch.d_out and is_unital(ch)
    report["unital"] = unital
    norm1 = output_2norm(ch, opts)
    report["norm2_estimate"] = norm1.value
    if unital:
        spec = second_singular_value(ch)
        excess, diag0, off = check_block_structure(ch)
        report["lambda2"] = spec.lambda2
        report["fixed_point_residual"] = spec.fixed_point_residual
        report["block_residuals"] = {"excess": excess, "diag0": diag0, "offdiag": off}
        cap = capacity_report(ch, cfg.n, seed=cfg.master_seed)
        report["capacity"] = {
            "upper_bits": cap.upper_bits, "lower_bits": cap.lower_bits, "gap_bits": cap.gap_bits,
            "upper_method": cap.upper_method, "lower_method": cap.lower_method, **cap.details,
        }
    else:
        report["capacity"] = {"upper_bits": None,
                              "lower_bits": q_lower_lsd(ch, seed=cfg.master_seed),
                              "lower_method": "coherent_information"}
    if cfg.n >= 2:
        tens = output_2norm_tensor(ch, cfg.n, opts, single=norm1, guard=cfg.dimension_guard)
        report["n"] = cfg.n
        report["norm2_tensor_estimate"] = tens.value
        report["norm2_tensor_certified_upper"] = tens.certified_upper
        if norm1.value < 1 - 1e-9:
            report["alpha_hat"] = multiplicativity_report(ch, cfg.n, opts).alpha_hat
    if ch.d_in == ch.d_out:
        report["zero_error_upper_bits"] = {
            name: zero_error_upper(ch, cfg.n, pi, opts) for name, pi in _pi_family(ch, cfg.n).items()
        }
    _emit(dumps(report) + "\n", cfg.out)
    return EXIT_OK


def cmd_expander_survey(args, cfg: RunConfig) -> int:
    trials = cfg.trials or 20
    norm_opts = SURVEY_ASCENT if args.restarts is None else cfg.ascent(max_iter=min(cfg.max_iter, 300))
    rep = ensemble_survey(args.d, args.k, trials, cfg.eps, cfg.master_seed, norm_opts,
                          n=cfg.n if cfg.n >= 2 else None, workers=cfg.workers)
    text = csv_text(CSV_COLUMNS, [s.csv_row() for s in rep.samples])
    summary = _meta(cfg)
    summary.update({
        "d": args.d, "k": args.k, "trials": trials, "eps": cfg.eps, "n": cfg.n,
        "fraction_within_4_4eps": rep.fraction_within,
        "fraction_within_4_5eps": rep.fraction_within_5eps,
        "c_hat_quantiles": {str(q): v for q, v in rep.c_hat_quantiles},
        "tail_probability_label": rep.tail_probability_label,
    })
    if cfg.out:
        Path(cfg.out).write_text(text)
        Path(cfg.out + ".meta.json").write_text(dumps(summary) + "\n")
        sys.stdout.write(dumps(summary) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    res = run_suite(args.suite, cfg.trials, cfg.master_seed)
    print(res.summary())
    return EXIT_OK if res.passed else EXIT_VIOLATION


def cmd_code_check(args, cfg: RunConfig) -> int:
    ch = channel_from_json(Path(args.channel).read_text())
    code = code_from_json(Path(args.code).read_text())
    rec = petz_recovery(code_noise_channel(ch, code, cfg.dimension_guard), default_reference_state(code))
    pi = WeightOperator.identity(ch.d_out ** code.n)
    v = check_lemma3(ch, code, rec, pi, cfg.trials or 2000, cfg.master_seed, cfg.ascent())
    report = _meta(cfg)
    report.update({"d_C": v.d_C, "eta_hat": v.eta.eta_hat, "eta_stderr": v.eta.stderr,
                   "trials": v.eta.trials, "g_norm": v.g_norm, "g_norm_kind": v.g_norm_kind,
                   "rhs": v.rhs, "slack": v.slack, "verdict": "PASS" if v.passed else "FAIL"})
    _emit(dumps(report) + "\n", cfg.out)
    return EXIT_OK if v.passed else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), help="master seed (64-bit)")
    common.add_argument("--trials", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--eps", type=float)
    common.add_argument("--out")
    common.add_argument("--guard", type=int, help="dimension guard")
    common.add_argument("--workers", type=int)

    p = argparse.ArgumentParser(prog="unitalcap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"unitalcap {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="spectral gap, 2-norm and capacity bounds")
    a.add_argument("channel", help="channel JSON file")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("expander-survey", parents=[common], help="sample random mixed-unitary expanders")
    e.add_argument("--d", type=int, required=True)
    e.add_argument("--k", type=int, required=True)
    e.set_defaults(func=cmd_expander_survey)

    v = sub.add_parser("verify", parents=[common], help="run a property suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("code-check", parents=[common], help="Petz recovery fidelity and code-dimension bound")
    c.add_argument("channel")
    c.add_argument("code", help="code JSON file")
    c.set_defaults(func=cmd_code_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_env(
            master_seed=args.seed, trials=args.trials, restarts=args.restarts, n=args.n,
            eps=args.eps, out=args.out, dimension_guard=args.guard, workers=args.workers,
        )
        return args.func(args, cfg)
    except (UnitalCapError, OSError) as exc:
        print(f"unitalcap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

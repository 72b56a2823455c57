"""Batch pipeline CLI: extract, smooth, augment, units, eval, check.

Exit codes: 0 success, 1 failed check or metric suite, 2 I/O or argument
error. Every subcommand is deterministic given its flags; randomness funnels
through --seed and gets recorded in output metadata.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import checks as check_suites
from .augment import AugmentParams, pro_aug
from .bundle import ProsodyBundle, load_bundle, save_bundle
from .errors import DegenerateInputError, EvcError, ParameterError
from .metrics import MetricReport, aligned_pcc, character_error_rate, eecs, word_error_rate
from .prosody import F0Params, estimate_f0, savgol_smooth
from .signal_io import FrameParams, frame_energy, load_wav, mel_spectrogram
from .units import (
    dedup,
    expand,
    kmeans_assign,
    kmeans_fit,
    load_codebook,
    load_dedup,
    load_features,
    load_units,
    save_codebook,
    save_dedup,
    save_units,
)


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _load_config(argv):
    """Pre-scan argv for --config and return its key=value pairs."""
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
    if path is None:
        return {}
    config = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        config[key.strip().replace("-", "_")] = value.strip()
    return config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="seed for any randomness")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for file lists")
    parser.add_argument("--config", default=None, help="key=value file of option defaults")


def _add_analysis_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sample-rate", type=int, default=16000,
                        help="expected input rate; mismatches error (no resampling)")
    parser.add_argument("--window", type=int, default=1024)
    parser.add_argument("--hop", type=int, default=256)
    parser.add_argument("--n-mels", type=int, default=80)
    parser.add_argument("--fmin", type=float, default=0.0)
    parser.add_argument("--fmax", type=float, default=8000.0)
    parser.add_argument("--f0-min", type=float, default=50.0)
    parser.add_argument("--f0-max", type=float, default=600.0)
    parser.add_argument("--periodicity-threshold", type=float, default=0.45)


def _add_savgol_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--savgol-window", type=int, default=9)
    parser.add_argument("--savgol-order", type=int, default=2)


def build_parser(config: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evckit",
                                     description="prosody pipeline tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="wav -> prosody bundle")
    p_extract.add_argument("wavs", nargs="+", metavar="WAV")
    p_extract.add_argument("--out", default=None, help="bundle path (single input)")
    p_extract.add_argument("--out-dir", default=None, help="directory for bundles")
    p_extract.add_argument("--units", default=None,
                           help="unit sequence file; adds deduplicated durations")
    _add_analysis_options(p_extract)
    _add_savgol_options(p_extract)
    _add_common(p_extract)
    p_extract.set_defaults(func=cmd_extract)

    p_smooth = sub.add_parser("smooth", help="recompute smoothed contours in a bundle")
    p_smooth.add_argument("bundle")
    p_smooth.add_argument("--out", required=True)
    _add_savgol_options(p_smooth)
    _add_common(p_smooth)
    p_smooth.set_defaults(func=cmd_smooth)

    p_augment = sub.add_parser("augment", help="add augmented contours to a bundle")
    p_augment.add_argument("bundle")
    p_augment.add_argument("--out", required=True)
    p_augment.add_argument("--shift-range", type=int, nargs=2, default=(-15, 15),
                           metavar=("LO", "HI"))
    p_augment.add_argument("--segments", type=int, nargs=2, default=(2, 5),
                           metavar=("LO", "HI"))
    p_augment.add_argument("--scale-range", type=float, nargs=2, default=(0.4, 1.6),
                           metavar=("LO", "HI"))
    _add_common(p_augment)
    p_augment.set_defaults(func=cmd_augment)

    p_units = sub.add_parser("units", help="codebook fit / encode / dedup / expand")
    units_sub = p_units.add_subparsers(dest="action", required=True)

    p_fit = units_sub.add_parser("fit")
    p_fit.add_argument("--features", required=True)
    p_fit.add_argument("--k", type=int, default=500)
    p_fit.add_argument("--max-iters", type=int, default=100)
    p_fit.add_argument("--out", required=True)
    _add_common(p_fit)
    p_fit.set_defaults(func=cmd_units_fit)

    p_encode = units_sub.add_parser("encode")
    p_encode.add_argument("--features", required=True)
    p_encode.add_argument("--codebook", required=True)
    p_encode.add_argument("--out", required=True)
    _add_common(p_encode)
    p_encode.set_defaults(func=cmd_units_encode)

    p_dedup = units_sub.add_parser("dedup")
    p_dedup.add_argument("--units", required=True)
    p_dedup.add_argument("--out", required=True)
    _add_common(p_dedup)
    p_dedup.set_defaults(func=cmd_units_dedup)

    p_expand = units_sub.add_parser("expand")
    p_expand.add_argument("--dedup", required=True)
    p_expand.add_argument("--out", required=True)
    _add_common(p_expand)
    p_expand.set_defaults(func=cmd_units_expand)

    p_eval = sub.add_parser("eval", help="objective metrics over bundle pairs")
    p_eval.add_argument("--ref", action="append", required=True)
    p_eval.add_argument("--hyp", action="append", required=True)
    p_eval.add_argument("--ref-text", action="append", default=None)
    p_eval.add_argument("--hyp-text", action="append", default=None)
    p_eval.add_argument("--ref-emb", action="append", default=None)
    p_eval.add_argument("--hyp-emb", action="append", default=None)
    _add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_check = sub.add_parser("check", help="run the oracle and gradient suites")
    p_check.add_argument("--grads", action="store_true")
    p_check.add_argument("--oracles", action="store_true")
    _add_common(p_check)
    p_check.set_defaults(func=cmd_check)

    if config:
        # config supplies defaults only; explicit flags still win
        def apply(p):
            known = {a.dest for a in p._actions}  # argparse has no public hook for this
            p.set_defaults(**{k: v for k, v in config.items() if k in known})

        for sp in sub.choices.values():
            apply(sp)
            for group in sp._subparsers._group_actions if sp._subparsers else []:
                for nested in group.choices.values():
                    apply(nested)
    return parser


def _extract_one(wav_path: str, out_path: Path, args) -> dict:
    wav = load_wav(wav_path)
    if wav.sample_rate != args.sample_rate:
        raise ParameterError(
            f"{wav_path}: sample rate {wav.sample_rate} != expected {args.sample_rate} "
            "(resampling not implemented)"
        )
    frame_params = FrameParams(window_size=args.window, hop_size=args.hop,
                               n_mels=args.n_mels, fmin=args.fmin, fmax=args.fmax)
    f0_params = F0Params(f0_min=args.f0_min, f0_max=args.f0_max,
                         periodicity_threshold=args.periodicity_threshold,
                         hop_size=args.hop, frame_window=args.window)
    mel = mel_spectrogram(wav, frame_params)
    energy = frame_energy(mel)
    f0, vuv = estimate_f0(wav, f0_params)
    f0_smooth = savgol_smooth(f0, args.savgol_window, args.savgol_order, vuv=vuv)
    energy_smooth = savgol_smooth(energy, args.savgol_window, args.savgol_order)

    durations = None
    durations_smooth = None
    if args.units:
        durations = dedup(load_units(args.units))
        if len(durations):
            durations_smooth = savgol_smooth(durations.counts.astype(float),
                                             args.savgol_window, args.savgol_order)

    bundle = ProsodyBundle(
        f0=f0, f0_smooth=f0_smooth, energy=energy, energy_smooth=energy_smooth,
        vuv=vuv, durations=durations, durations_smooth=durations_smooth,
        meta={
            "source": Path(wav_path).name,
            "sample_rate": wav.sample_rate,
            "hop": args.hop,
            "window": args.window,
            "f0_min": args.f0_min,
            "f0_max": args.f0_max,
            "savgol_window": args.savgol_window,
            "savgol_order": args.savgol_order,
        },
    )
    save_bundle(out_path, bundle)
    return {
        "input": str(wav_path),
        "output": str(out_path),
        "frames": bundle.n_frames,
        "voiced_fraction": float(vuv.mean()),
    }


def cmd_extract(args) -> int:
    if args.out is not None and len(args.wavs) != 1:
        raise ParameterError("--out only applies to a single input; use --out-dir")
    if args.out is None and args.out_dir is None:
        raise ParameterError("one of --out or --out-dir is required")
    out_paths = []
    for wav in args.wavs:
        if args.out is not None:
            out_paths.append(Path(args.out))
        else:
            out_dir = Path(args.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            out_paths.append(out_dir / (Path(wav).stem + ".bundle.json"))
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_extract_one, wav, out, args)
                       for wav, out in zip(args.wavs, out_paths)]
            summaries = [f.result() for f in futures]  # input order, not completion order
    else:
        summaries = [_extract_one(wav, out, args) for wav, out in zip(args.wavs, out_paths)]
    for summary in summaries:
        _emit(summary)
    return 0


def cmd_smooth(args) -> int:
    bundle = load_bundle(args.bundle)
    bundle.f0_smooth = savgol_smooth(bundle.f0, args.savgol_window, args.savgol_order,
                                     vuv=bundle.vuv)
    bundle.energy_smooth = savgol_smooth(bundle.energy, args.savgol_window, args.savgol_order)
    if bundle.durations is not None and len(bundle.durations):
        bundle.durations_smooth = savgol_smooth(bundle.durations.counts.astype(float),
                                                args.savgol_window, args.savgol_order)
    bundle.meta["savgol_window"] = args.savgol_window
    bundle.meta["savgol_order"] = args.savgol_order
    save_bundle(args.out, bundle)
    _emit({"input": args.bundle, "output": args.out, "frames": bundle.n_frames})
    return 0


def cmd_augment(args) -> int:
    bundle = load_bundle(args.bundle)
    seed = args.seed
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**32))
    params = AugmentParams(
        shift_range=tuple(args.shift_range),
        n_segments_range=tuple(args.segments),
        scale_range=tuple(args.scale_range),
        seed=seed,
    )
    bundle.f0_aug, bundle.energy_aug = pro_aug(bundle.f0_smooth, bundle.energy_smooth, params)
    bundle.meta["augment"] = {
        "seed": seed,
        "shift_range": list(params.shift_range),
        "n_segments_range": list(params.n_segments_range),
        "scale_range": list(params.scale_range),
    }
    save_bundle(args.out, bundle)
    _emit({"input": args.bundle, "output": args.out, "seed": seed})
    return 0


def cmd_units_fit(args) -> int:
    features = load_features(args.features)
    codebook = kmeans_fit(features, args.k, seed=args.seed if args.seed is not None else 0,
                          max_iters=args.max_iters)
    save_codebook(args.out, codebook)
    _emit({"output": args.out, "k": codebook.k, "dim": codebook.dim,
           "iterations": len(codebook.inertia_history),
           "inertia": codebook.inertia_history[-1]})
    return 0


def cmd_units_encode(args) -> int:
    features = load_features(args.features)
    codebook = load_codebook(args.codebook)
    units = kmeans_assign(features, codebook)
    save_units(args.out, units)
    _emit({"output": args.out, "frames": int(units.size)})
    return 0


def cmd_units_dedup(args) -> int:
    units = load_units(args.units)
    result = dedup(units)
    save_dedup(args.out, result)
    _emit({"output": args.out, "unique": len(result), "total": int(result.counts.sum())})
    return 0


def cmd_units_expand(args) -> int:
    result = load_dedup(args.dedup)
    save_units(args.out, expand(result))
    _emit({"output": args.out, "frames": int(result.counts.sum())})
    return 0


def _optional_list(values, n_pairs: int, flag: str):
    if values is None:
        return [None] * n_pairs
    if len(values) != n_pairs:
        raise ParameterError(f"{flag} must be given once per --ref/--hyp pair")
    return values


def _eval_pair(ref_path, hyp_path, ref_text, hyp_text, ref_emb, hyp_emb) -> MetricReport:
    ref = load_bundle(ref_path)
    hyp = load_bundle(hyp_path)
    report = MetricReport()
    try:
        report.f0_pcc = aligned_pcc(ref.f0, hyp.f0, drop_zeros=True)
    except (DegenerateInputError, ParameterError) as exc:
        print(f"warning: f0_pcc unavailable for {hyp_path}: {exc}", file=sys.stderr)
    try:
        report.e_pcc = aligned_pcc(ref.energy, hyp.energy)
    except (DegenerateInputError, ParameterError) as exc:
        print(f"warning: e_pcc unavailable for {hyp_path}: {exc}", file=sys.stderr)
    if ref_text is not None and hyp_text is not None:
        ref_str = Path(ref_text).read_text().strip()
        hyp_str = Path(hyp_text).read_text().strip()
        report.wer = word_error_rate(ref_str, hyp_str)
        report.cer = character_error_rate(ref_str, hyp_str)
    if ref_emb is not None and hyp_emb is not None:
        e1 = np.loadtxt(ref_emb, delimiter=",", ndmin=1)
        e2 = np.loadtxt(hyp_emb, delimiter=",", ndmin=1)
        report.eecs = eecs(e1, e2)
    return report


def cmd_eval(args) -> int:
    if len(args.ref) != len(args.hyp):
        raise ParameterError("--ref and --hyp must be given the same number of times")
    n_pairs = len(args.ref)
    ref_texts = _optional_list(args.ref_text, n_pairs, "--ref-text")
    hyp_texts = _optional_list(args.hyp_text, n_pairs, "--hyp-text")
    ref_embs = _optional_list(args.ref_emb, n_pairs, "--ref-emb")
    hyp_embs = _optional_list(args.hyp_emb, n_pairs, "--hyp-emb")

    reports = []
    for k in range(n_pairs):
        report = _eval_pair(args.ref[k], args.hyp[k], ref_texts[k], hyp_texts[k],
                            ref_embs[k], hyp_embs[k])
        row = dict(report.as_dict(), ref=args.ref[k], hyp=args.hyp[k])
        _emit(row)
        reports.append(report)
    if n_pairs > 1:
        summary = {"summary": True}
        for key in ("wer", "cer", "eecs", "f0_pcc", "e_pcc"):
            values = [getattr(r, key) for r in reports if getattr(r, key) is not None]
            summary[key] = float(np.mean(values)) if values else None
        _emit(summary)
    return 0


def cmd_check(args) -> int:
    grads, oracles = args.grads, args.oracles
    if not grads and not oracles:
        grads = oracles = True
    ok = True
    for result in check_suites.run_checks(grads=grads, oracles=oracles):
        _emit(result)
        ok = ok and result["pass"]
    return 0 if ok else 1


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = _load_config(argv)
        parser = build_parser(config)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        return args.func(args)
    except EvcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line pipeline: match, fit, apply, convert, factorize, evaluate.

Every subcommand reads/writes LVCF matrices (plus CSV reports and PGM
images), writes outputs atomically, and prints a single-line JSON summary
to stdout. Exit status: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import factorization, lvcf, metrics, synth, transforms
from .matching import gather_targets, match_frames

DEFAULT_SEED = 17
KIND_ALIASES = {"bias": "bias_only"}


def _env_int(name: str, fallback: int) -> int:
    value = os.environ.get(name)
    if value is None:
        return fallback
    try:
        return int(value)
    except ValueError:
        raise SystemExit(f"invalid {name}={value!r}: expected an integer")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=_env_int("LINEARVC_SEED", DEFAULT_SEED),
        help="RNG seed for randomized paths (default %(default)s; env LINEARVC_SEED)",
    )
    common.add_argument(
        "--threads",
        type=int,
        default=_env_int("LINEARVC_THREADS", os.cpu_count() or 1),
        help="internal parallelism cap (default: all cores; env LINEARVC_THREADS)",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linearvc",
        description="Linear voice conversion over feature matrices (LVCF files).",
    )
    common = _common_parser()
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("match", parents=[common],
                       help="pair source frames with nearest target frames")
    p.add_argument("--src", required=True, help="source matrix (LVCF)")
    p.add_argument("--tgt", required=True, help="target matrix (LVCF)")
    p.add_argument("--k", type=int, default=1, help="neighbours per source frame (default %(default)s)")
    p.add_argument("--out", required=True, help="output pairs matrix (LVCF, 3 columns)")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("fit", parents=[common], help="fit a linear conversion map")
    p.add_argument("--src", required=True, help="source speaker matrix (LVCF)")
    p.add_argument("--tgt", required=True, help="target speaker matrix (LVCF)")
    p.add_argument("--kind", default="unconstrained",
                   choices=["bias", "bias_only", "orthogonal", "unconstrained"],
                   help="transform family (default %(default)s)")
    p.add_argument("--bias", action="store_true",
                   help="fit a bias term (default: off, matching the plain objective)")
    p.add_argument("--ridge", type=float, default=0.0,
                   help="L2 penalty for unconstrained fits (default %(default)s)")
    p.add_argument("--k", type=int, default=1,
                   help="neighbours mean-pooled during matching (default %(default)s)")
    p.add_argument("--no-match", action="store_true",
                   help="treat src/tgt as already paired row-for-row")
    p.add_argument("--out", required=True, help="output map directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("apply", parents=[common], help="apply a fitted map")
    p.add_argument("--map", dest="map_dir", required=True, help="map directory from fit")
    p.add_argument("--in", dest="infile", required=True, help="input matrix (LVCF)")
    p.add_argument("--out", required=True, help="output matrix (LVCF)")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("knn-convert", parents=[common],
                       help="nearest-neighbour baseline conversion")
    p.add_argument("--src", required=True, help="source matrix (LVCF)")
    p.add_argument("--pool", required=True, help="target frame pool (LVCF)")
    p.add_argument("--k", type=int, default=4, help="neighbours to mean (default %(default)s)")
    p.add_argument("--out", required=True, help="output matrix (LVCF)")
    p.set_defaults(func=cmd_knn_convert)

    p = sub.add_parser("factorize", parents=[common],
                       help="factor speakers into shared content + per-speaker maps")
    p.add_argument("--speakers", nargs="+", required=True, help="speaker matrices (LVCF)")
    p.add_argument("--ids", default=None, help="comma-separated speaker ids (default: file stems)")
    p.add_argument("--rank", type=int, default=factorization.DEFAULT_RANK,
                   help="retained rank (default %(default)s)")
    p.add_argument("--pivot", default=None,
                   help="pivot speaker id (default: first id lexicographically)")
    p.add_argument("--k-match", type=int, default=1,
                   help="neighbours mean-pooled during matching (default %(default)s)")
    p.add_argument("--aligned", action="store_true",
                   help="inputs are frame-parallel; skip matching")
    p.add_argument("--out", required=True, help="output factorization directory")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("convert", parents=[common],
                       help="convert frames through a factorization")
    p.add_argument("--fact", required=True, help="factorization directory")
    p.add_argument("--src-id", required=True, help="source speaker id")
    p.add_argument("--tgt-id", required=True, help="target speaker id")
    p.add_argument("--in", dest="infile", required=True, help="input matrix (LVCF)")
    p.add_argument("--out", required=True, help="output matrix (LVCF)")
    p.add_argument("--rcond", type=float, default=factorization.DEFAULT_CONVERT_RCOND,
                   help="pseudoinverse cutoff (default %(default)s)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("rank-sweep", parents=[common],
                       help="factorize at several ranks and report metrics")
    p.add_argument("--speakers", nargs="+", required=True, help="speaker matrices (LVCF)")
    p.add_argument("--ids", default=None, help="comma-separated speaker ids (default: file stems)")
    p.add_argument("--ranks", required=True, help="comma-separated ranks, e.g. 2,4,8,16,32,64,100")
    p.add_argument("--pivot", default=None,
                   help="pivot speaker id (default: first id lexicographically)")
    p.add_argument("--k-match", type=int, default=1,
                   help="neighbours mean-pooled during matching (default %(default)s)")
    p.add_argument("--aligned", action="store_true",
                   help="inputs are frame-parallel; skip matching")
    p.add_argument("--out", required=True, help="output CSV (rank,metric_name,value)")
    p.set_defaults(func=cmd_rank_sweep)

    p = sub.add_parser("synth", parents=[common],
                       help="generate a synthetic multi-speaker dataset with ground truth")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--frames", type=int, default=2000, help="frames per speaker (default %(default)s)")
    p.add_argument("--dim", type=int, default=64, help="feature dimension (default %(default)s)")
    p.add_argument("--rank", type=int, default=8, help="planted content rank (default %(default)s)")
    p.add_argument("--speakers", type=int, default=4, help="speaker count (default %(default)s)")
    p.add_argument("--classes", type=int, default=20, help="content classes (default %(default)s)")
    p.add_argument("--noise", type=float, default=0.01, help="noise sigma (default %(default)s)")
    p.add_argument("--family", default="orthogonal", choices=list(synth.FAMILIES),
                   help="speaker transform family (default %(default)s)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", parents=[common], help="compute an objective metric")
    p.add_argument("metric", choices=["wer", "cer", "eer"])
    p.add_argument("--ref", help="reference transcripts (id<TAB>text per line)")
    p.add_argument("--hyp", help="hypothesis transcripts (id<TAB>text per line)")
    p.add_argument("--scores", help="CSV of label,score rows for eer")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-viz", parents=[common],
                       help="threshold + binarize a fitted weight matrix as PGM")
    p.add_argument("--map", dest="map_dir", required=True, help="map directory from fit")
    p.add_argument("--threshold", type=float, default=None,
                   help="absolute threshold (default: 99th percentile of |weight|)")
    p.add_argument("--dims", type=int, default=256,
                   help="image side length (default %(default)s, clamped to the map dimension)")
    p.add_argument("--out", required=True, help="output PGM file")
    p.set_defaults(func=cmd_export_viz)

    return parser


def cmd_match(args) -> dict:
    src = lvcf.read_matrix(args.src)
    tgt = lvcf.read_matrix(args.tgt)
    pairs = match_frames(src, tgt, args.k)
    lvcf.write_matrix(pairs.to_matrix(), args.out)
    return {"pairs": len(pairs), "mean_distance": float(pairs.distances.mean())}


def cmd_fit(args) -> dict:
    x = lvcf.read_matrix(args.src)
    tgt = lvcf.read_matrix(args.tgt)
    if args.no_match:
        if x.shape[0] != tgt.shape[0]:
            raise ValueError(
                f"--no-match requires equal frame counts, got {x.shape[0]} and {tgt.shape[0]}"
            )
        y = tgt
    else:
        pairs = match_frames(x, tgt, args.k)
        y = gather_targets(pairs, tgt, args.k)
    kind = KIND_ALIASES.get(args.kind, args.kind)
    est = transforms.LinearTransform(kind=kind, with_bias=args.bias, ridge=args.ridge)
    est.fit(x, y)
    est.save(args.out)
    residual = float(np.linalg.norm(y - est.transform(x)) / max(np.linalg.norm(y), 1e-30))
    return {"kind": kind, "dim": est.fitted_dim_, "train_frames": x.shape[0],
            "relative_residual": residual}


def cmd_apply(args) -> dict:
    est = transforms.LinearTransform.load(args.map_dir)
    x = lvcf.read_matrix(args.infile)
    out = est.transform(x)
    lvcf.write_matrix(out, args.out)
    return {"rows": out.shape[0], "dim": out.shape[1]}


def cmd_knn_convert(args) -> dict:
    src = lvcf.read_matrix(args.src)
    pool = lvcf.read_matrix(args.pool)
    out = transforms.knn_convert(src, pool, args.k)
    lvcf.write_matrix(out, args.out)
    return {"rows": out.shape[0], "k": args.k}


def _speaker_inputs(paths: list[str], ids_csv: str | None) -> tuple[list[np.ndarray], list[str]]:
    mats = [lvcf.read_matrix(p) for p in paths]
    if ids_csv is None:
        ids = [Path(p).stem for p in paths]
    else:
        ids = [s.strip() for s in ids_csv.split(",")]
    if len(ids) != len(mats):
        raise ValueError(f"got {len(ids)} ids for {len(mats)} speaker matrices")
    if len(set(ids)) != len(ids):
        raise ValueError(f"speaker ids must be unique, got {ids}; use --ids to disambiguate")
    return mats, ids


def cmd_factorize(args) -> dict:
    mats, ids = _speaker_inputs(args.speakers, args.ids)
    est = factorization.ContentFactorization(
        rank=args.rank, pivot=args.pivot, k_match=args.k_match, aligned=args.aligned
    )
    est.fit(mats, speaker_ids=ids)
    factorization.save_factorization(est.factorization_, args.out)
    fact = est.factorization_
    return {"rank": fact.rank, "effective_rank": fact.effective_rank,
            "speakers": len(ids), "dim": fact.content_dim, "pivot": fact.pivot_id}


def cmd_convert(args) -> dict:
    fact = factorization.load_factorization(args.fact)
    x = lvcf.read_matrix(args.infile)
    out = factorization.convert(fact, x, args.src_id, args.tgt_id, rcond=args.rcond)
    lvcf.write_matrix(out, args.out)
    return {"rows": out.shape[0], "src": args.src_id, "tgt": args.tgt_id, "rank": fact.rank}


def cmd_rank_sweep(args) -> dict:
    mats, ids = _speaker_inputs(args.speakers, args.ids)
    try:
        ranks = [int(tok) for tok in args.ranks.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"--ranks must be a comma-separated integer list, got {args.ranks!r}")
    pivot_id = min(ids) if args.pivot is None else args.pivot
    if pivot_id not in ids:
        raise ValueError(f"pivot id {pivot_id!r} not among speaker ids {ids}")
    report = factorization.rank_sweep(
        mats, ids.index(pivot_id), ranks,
        k_match=args.k_match, aligned=args.aligned, speaker_ids=ids,
    )
    factorization.sweep_to_csv(report, args.out)
    return {"ranks": sorted(report), "pivot": pivot_id}


def cmd_synth(args) -> dict:
    spec = synth.SynthSpec(
        n_frames=args.frames, d=args.dim, r_true=args.rank, k_speakers=args.speakers,
        n_content_classes=args.classes, noise_sigma=args.noise,
        transform_family=args.family, seed=args.seed,
    )
    mats, truth = synth.generate(spec)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    ids = list(factorization.default_speaker_ids(spec.k_speakers))
    for sid, mat in zip(ids, mats):
        lvcf.write_matrix(mat, outdir / f"{sid}.lvcf")
    lvcf.write_matrix(truth.content_labels.reshape(-1, 1).astype(np.float64),
                      outdir / "truth_labels.lvcf")
    lvcf.write_matrix(truth.content_points, outdir / "truth_content.lvcf")
    for sid, transform, bias in zip(ids, truth.speaker_transforms, truth.speaker_biases):
        lvcf.write_matrix(transform, outdir / f"truth_transform_{sid}.lvcf")
        lvcf.write_matrix(bias.reshape(1, -1), outdir / f"truth_bias_{sid}.lvcf")
    manifest = {
        "speaker_ids": ids, "n_frames": spec.n_frames, "dim": spec.d,
        "r_true": spec.r_true, "n_content_classes": spec.n_content_classes,
        "noise_sigma": spec.noise_sigma, "transform_family": spec.transform_family,
        "seed": spec.seed,
    }
    raw = json.dumps(manifest, sort_keys=True, indent=2).encode() + b"\n"
    lvcf.atomic_write_bytes(raw, outdir / "manifest.json")
    return {"speakers": spec.k_speakers, "frames": spec.n_frames, "dim": spec.d,
            "family": spec.transform_family, "seed": spec.seed}


def cmd_eval(args) -> dict:
    if args.metric in ("wer", "cer"):
        if not args.ref or not args.hyp:
            raise ValueError(f"eval {args.metric} requires --ref and --hyp")
        refs = metrics.read_transcripts(args.ref)
        hyps = metrics.read_transcripts(args.hyp)
        unit = "word" if args.metric == "wer" else "char"
        report = metrics.corpus_error_rate(refs, hyps, unit=unit)
        return {"metric": report.metric, "value": report.value, "support": report.support}
    if not args.scores:
        raise ValueError("eval eer requires --scores")
    scores = metrics.read_scores_csv(args.scores)
    value = metrics.eer(scores)
    return {"metric": "eer", "value": value,
            "support": len(scores.genuine) + len(scores.impostor)}


def cmd_export_viz(args) -> dict:
    est = transforms.LinearTransform.load(args.map_dir)
    dims = min(args.dims, est.fitted_dim_)
    image = transforms.export_viz(est, threshold=args.threshold, max_dims=dims)
    transforms.write_pgm(image, args.out)
    return {"dims": dims, "set_pixels": int(image.sum())}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        with threadpool_limits(limits=args.threads):
            summary = args.func(args)
    except Exception as exc:  # runtime errors -> exit 1 with message on stderr
        print(f"linearvc {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1
    summary = {"subcommand": args.subcommand,
               "elapsed_s": round(time.perf_counter() - start, 6), **summary}
    print(json.dumps(summary, sort_keys=True))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

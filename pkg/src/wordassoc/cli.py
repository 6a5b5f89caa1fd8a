"""Command-line front end.

Exit status: 0 on success, 1 on bad input, 2 when a verification fails.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analogy_eval import DEFAULT_THRESHOLDS, DEFAULT_TOL, LABELS, load_analogies, preservation_curves
from .association import (
    WeatInput,
    association_row,
    bootstrap_mean_p_value,
    weat,
)
from .corpus_stats import ModelConstants, count_cooccurrences, load_table, read_corpus, save_table
from .debiasing import DebiasConfig, debias_embedding, load_word_list
from .embedding_store import FORMATS, load_embeddings, save_embeddings
from .errors import WordAssocError
from .factorization_lab import debiasing_theorem_suite, prop1_suite
from .relations import GENDER_DEFINING_PAIRS, WordPairSet, load_pairs, relation_vector, scalar_projection
from .reporting import dumps, emit, render_csv, sidecar

EXIT_INPUT = 1
EXIT_VERIFY = 2


class VerificationFailed(Exception):
    pass


def _config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "tamper_projection")}
    cfg["version"] = __version__
    return cfg


def _pairs(path: str | None) -> WordPairSet:
    return load_pairs(path) if path else WordPairSet(GENDER_DEFINING_PAIRS)


def _constants(args) -> ModelConstants:
    return ModelConstants(lambda_=args.lambda_, alpha=args.alpha, k=args.k)


def _table(args):
    if args.cooc_table:
        return load_table(args.cooc_table)
    if args.corpus:
        return count_cooccurrences(read_corpus(args.corpus, args.lowercase), args.window, args.jobs)
    return None


def _categories(specs: Sequence[str]) -> list[tuple[str, list[str]]]:
    out = []
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise WordAssocError(f"--categories expects NAME=PATH, got {spec!r}")
        out.append((name, load_word_list(path)))
    return out


def cmd_ripa(args) -> int:
    emb = load_embeddings(args.embeddings, args.format)
    b = relation_vector(emb, _pairs(args.pairs))
    words = load_word_list(args.words) if args.words else list(emb.vocab.words)
    values = scalar_projection(emb.vectors(words), b)
    emit(render_csv(["word", "ripa"], zip(words, values.tolist()), _config(args)), args.out)
    return 0


def cmd_weat(args) -> int:
    emb = load_embeddings(args.embeddings, args.format)
    inp = WeatInput(*(tuple(load_word_list(p)) for p in (args.targets1, args.targets2, args.attrs1, args.attrs2)))
    res = weat(inp, emb, args.max_exhaustive, args.samples, args.seed)
    report = {
        "statistic": res.statistic,
        "effect_size": res.effect_size,
        "p_value": res.p_value,
        "n_partitions": res.n_partitions,
        "exhaustive": res.exhaustive,
        "convention": res.convention,
        "config": _config(args),
    }
    emit(dumps(report), args.out)
    return 0


def cmd_breakdown(args) -> int:
    emb = load_embeddings(args.embeddings, args.format)
    pairs = _pairs(args.pairs)
    pairs.check_vocabulary(emb)
    table = _table(args)
    if table is None:
        raise WordAssocError("breakdown needs --cooc-table or --corpus")
    consts = _constants(args)
    rows, oov = [], {}
    for name, words in _categories(args.categories):
        for w in words:
            if w not in emb:
                oov.setdefault(name, []).append(w)
                continue
            rows.append(association_row(emb, table, consts, w, pairs, category=name))

    csv_rows = [(r.word, r.category, r.g, r.g_hat, r.delta_g, r.flags) for r in rows]
    emit(render_csv(["word", "category", "g", "g_hat", "delta_g", "flags"], csv_rows, _config(args)), args.out)

    summary = {}
    for name, _ in _categories(args.categories):
        cat = [r for r in rows if r.category == name]
        ok = [r for r in cat if r.delta_g is not None]
        deltas = [r.delta_g for r in ok]
        summary[name] = {
            "n_words": len(cat),
            "n_used": len(ok),
            "n_insufficient_counts": len(cat) - len(ok),
            "n_oov": len(oov.get(name, [])),
            "oov": oov.get(name, []),
            "mean_abs_g": float(np.mean([abs(r.g) for r in ok])) if ok else None,
            "mean_abs_g_hat": float(np.mean([abs(r.g_hat) for r in ok])) if ok else None,
            "mean_delta_g": float(np.mean(deltas)) if ok else None,
            "bootstrap_p_value": bootstrap_mean_p_value(deltas, args.bootstrap, args.seed),
        }
    report = {
        "categories": summary,
        "significance_test": "bootstrap over words, two-sided, mean delta_g = 0 (artifact convention)",
        "window": table.window,
        "total_events": table.total_events,
        "config": _config(args),
    }
    emit(dumps(report), sidecar(args.out, ".summary.json"))
    return 0


def cmd_debias(args) -> int:
    emb = load_embeddings(args.embeddings, args.format)
    protected = frozenset(load_word_list(args.protected)) if args.protected else frozenset()
    cfg = DebiasConfig(
        appropriate_pairs=_pairs(args.pairs),
        subspace_mode=args.mode,
        protected=protected,
        selector=args.selector,
        biased_pairs=load_pairs(args.biased_pairs) if args.biased_pairs else None,
    )
    res = debias_embedding(emb, cfg)
    save_embeddings(res.embeddings, args.out, args.format)
    report = {
        "subspace_mode": cfg.subspace_mode,
        "subspace_rank": res.subspace.rank,
        "n_debiased": len(res.debiased),
        "n_protected": len(res.protected),
        "protected": sorted(res.protected),
        "max_orthogonality_residual": res.max_residual,
        "biased_pairs": [list(p) for p in cfg.biased_pairs] if cfg.biased_pairs else None,
        "config": _config(args),
    }
    emit(dumps(report), sidecar(args.out, ".report.json"))
    return 0


def cmd_analogy_eval(args) -> int:
    before = load_embeddings(args.embeddings, args.format)
    after = load_embeddings(args.debiased, args.format)
    if before.vocab.words != after.vocab.words:
        raise WordAssocError("before/after embeddings must share the same vocabulary order")
    quads = load_analogies(args.analogies)
    b = relation_vector(before, _pairs(args.pairs))
    curves = preservation_curves(quads, before, after, b, DEFAULT_THRESHOLDS, args.tol)
    rows = []
    for label in LABELS:
        c = curves[label]
        rows += [(label, t, nb, na) for t, nb, na in zip(c.thresholds, c.counts_before, c.counts_after)]
    emit(render_csv(["label", "threshold", "count_before", "count_after"], rows, _config(args)), args.out)
    summary = {
        "preserved_fraction_at_0.5": {lab: curves[lab].preserved_fraction(0.5) for lab in LABELS},
        "fractions": {
            lab: [None if nb == 0 else na / nb for nb, na in zip(curves[lab].counts_before, curves[lab].counts_after)]
            for lab in LABELS
        },
        "thresholds": list(DEFAULT_THRESHOLDS),
        "holds_criterion": f"cos(b-a, y-x) >= 1 - tol and ||a+y-x-b|| <= tol*||y-x||, tol={args.tol}",
        "config": _config(args),
    }
    emit(dumps(summary), sidecar(args.out, ".summary.json"))
    return 0


def cmd_corpus_stats(args) -> int:
    table = count_cooccurrences(read_corpus(args.corpus, args.lowercase), args.window, args.jobs)
    if args.out is None:
        raise WordAssocError("corpus-stats needs --out")
    save_table(table, args.out)
    return 0


def _tampered(w, subspace):
    from .relations import project_onto

    return 0.5 * project_onto(w, subspace)


def cmd_verify_theorems(args) -> int:
    kwargs = {}
    if args.tamper_projection:
        kwargs["projector"] = _tampered
    if args.lambda_grid:
        kwargs["lambdas"] = args.lambda_grid
    instances = debiasing_theorem_suite(args.instances, seed=args.seed, **kwargs)
    prop1 = prop1_suite(seed=args.seed)
    theorem_ok = all(i.passed for i in instances)
    prop1_ok = all(ok for _, _, ok in prop1)
    report = {
        "debiasing_theorem": {
            "passed": theorem_ok,
            "n_instances": len(instances),
            "instances": [
                {
                    "seed": i.seed,
                    "n": i.n,
                    "d": i.d,
                    "n_pairs": i.n_pairs,
                    "lambda": i.lambda_,
                    "max_residual": i.max_residual,
                    "threshold": i.threshold,
                    "passed": i.passed,
                }
                for i in instances
            ],
        },
        "prop1_dichotomy": {
            "passed": prop1_ok,
            "cases": [
                {"ratio": r, "cos_diff": res.cos_diff, "equal_freq": res.equal_freq, "passed": ok}
                for r, res, ok in prop1
            ],
        },
        "passed": theorem_ok and prop1_ok,
        "config": _config(args),
    }
    emit(dumps(report), args.out)
    if not report["passed"]:
        raise VerificationFailed("theorem verification failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wordassoc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, embeddings=True):
        if embeddings:
            p.add_argument("--embeddings", required=True)
            p.add_argument("--format", choices=FORMATS, default="word2vec-text")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")

    def corpus_opts(p):
        p.add_argument("--window", type=int, default=5)
        p.add_argument("--lowercase", action="store_true", help="lowercase the corpus before counting")
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("ripa", help="RIPA of every word (or --words) on the PC1 relation vector")
    common(p)
    p.add_argument("--pairs", help="TSV of ordered pairs; defaults to the ten gender-defining pairs")
    p.add_argument("--words", help="restrict output to these words (one per line)")
    p.set_defaults(func=cmd_ripa)

    p = sub.add_parser("weat", help="WEAT statistic, effect size and permutation p-value")
    common(p)
    for name in ("targets1", "targets2", "attrs1", "attrs2"):
        p.add_argument(f"--{name}", required=True, help="word list file")
    p.add_argument("--max-exhaustive", type=int, default=100_000)
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(func=cmd_weat)

    p = sub.add_parser("breakdown", help="embedding vs corpus genderedness per word and category")
    common(p)
    p.add_argument("--pairs")
    p.add_argument("--cooc-table")
    p.add_argument("--corpus")
    corpus_opts(p)
    p.add_argument("--categories", nargs="+", required=True, metavar="NAME=PATH")
    p.add_argument("--lambda", dest="lambda_", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=-1.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--bootstrap", type=int, default=10_000)
    p.set_defaults(func=cmd_breakdown)

    p = sub.add_parser("debias", help="subspace-projection debiasing")
    common(p)
    p.add_argument("--pairs", help="gender-defining pairs (bias subspace and b*)")
    p.add_argument("--biased-pairs", help="pairs from biased analogies (b')")
    p.add_argument("--protected", help="words never debiased, one per line")
    p.add_argument("--selector", choices=("none", "list", "unsupervised"), default="none")
    p.add_argument("--mode", choices=("span", "pc1"), default="span")
    p.set_defaults(func=cmd_debias)

    p = sub.add_parser("analogy-eval", help="analogy preservation curves before/after debiasing")
    common(p)
    p.add_argument("--debiased", required=True, help="debiased embeddings (same format)")
    p.add_argument("--analogies", required=True)
    p.add_argument("--pairs")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_analogy_eval)

    p = sub.add_parser("corpus-stats", help="count co-occurrences into a TSV table")
    common(p, embeddings=False)
    p.add_argument("--corpus", required=True)
    corpus_opts(p)
    p.set_defaults(func=cmd_corpus_stats)

    p = sub.add_parser("verify-theorems", help="synthetic checks of the debiasing guarantee and WEAT flaw")
    common(p, embeddings=False)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--lambda-grid", type=float, nargs="+")
    p.add_argument("--tamper-projection", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify_theorems)

    for name in ("breakdown", "debias", "analogy-eval"):
        sub.choices[name].set_defaults(_needs_out=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "_needs_out", False) and not args.out:
        parser.error(f"{args.subcommand} requires --out")
    if hasattr(args, "_needs_out"):
        del args._needs_out
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"wordassoc: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (WordAssocError, OSError) as exc:
        print(f"wordassoc {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

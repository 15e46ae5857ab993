"""Command-line front end.

Subcommands: ``interpret`` (text to ranked logic, in cycl/json/trace
formats), ``tag`` (concept-tag table), ``eval`` (scoring worksheet and
coverage/precision/length metrics from human verdicts) and ``lint``
(resource diagnostics).

Exit codes: 0 success (an empty interpretation list is success), 1 usage
error, 2 resource or load error, 3 lint findings.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import constructions as cons
from . import kb as kbmod
from . import tagger
from .interpreter import (Edge, EngineConfig, Interpretation, ParseGraph,
                          finalize, interpret)
from .kb import ContextStack, KnowledgeBase
from .logic import expr_to_json, print_expr


class UsageError(Exception):
    pass


class ResourceError(Exception):
    pass


@dataclass
class RunManifest:
    kb_files: list
    lexicon_files: list
    construction_files: list
    config: EngineConfig = field(default_factory=EngineConfig)


@dataclass
class Resources:
    kb: KnowledgeBase
    lexicon: tagger.Lexicon
    repo: cons.Repository


def _check_paths(paths, what: str):
    if not paths:
        raise UsageError(f"at least one {what} file is required")
    for p in paths:
        if not Path(p).exists():
            raise ResourceError(f"{what} file not found: {p}")


def load_resources(manifest: RunManifest) -> Resources:
    _check_paths(manifest.kb_files, "--kb")
    _check_paths(manifest.lexicon_files, "--lexicon")
    _check_paths(manifest.construction_files, "--constructions")
    try:
        kb = kbmod.load_kb(manifest.kb_files)
        lexicon = tagger.load_lexicon(manifest.lexicon_files)
        repo = cons.load_constructions(manifest.construction_files)
    except (kbmod.KbLoadError, tagger.LexiconLoadError,
            cons.ConstructionLoadError) as err:
        raise ResourceError(str(err)) from err
    return Resources(kb, lexicon, repo)


# ---------------------------------------------------------------------------
# Rendering

def _interpretation_line(it: Interpretation) -> str:
    return f"[{it.start}:{it.end}] {print_expr(it.logic)}"


def _edge_tree(graph: ParseGraph, edge: Edge) -> dict:
    node = {
        "id": edge.id,
        "source": edge.source,
        "span": [edge.start, edge.end],
        "logic": expr_to_json(edge.logic),
        "output_var": f"?{edge.output_var.name}" if edge.output_var else None,
        "output_type": expr_to_json(edge.output_type)
                       if edge.output_type is not None else None,
        "kind": edge.kind,
    }
    if edge.children:
        node["children"] = [
            {"slot": idx, **_edge_tree(graph, graph.edges[eid])}
            for idx, eid in edge.children
        ]
    return node


def _graph_json(graph: ParseGraph, interpretations: list) -> dict:
    return {
        "text": graph.text,
        "tokens": [{"surface": t.surface, "start": t.start, "end": t.end}
                   for t in graph.tokens],
        "truncated": graph.truncated,
        "interpretations": [
            {
                "id": f"i{rank}",
                "span": [it.start, it.end],
                "text": it.text,
                "logic": expr_to_json(it.logic),
                "output_type": expr_to_json(it.output_type)
                               if it.output_type is not None else None,
                "provenance": _edge_tree(graph, graph.edges[it.edge_id]),
            }
            for rank, it in enumerate(interpretations)
        ],
    }


def cmd_interpret(resources: Resources, config: EngineConfig, text: str,
                  fmt: str, out) -> int:
    graph = interpret(text, resources.kb, resources.repo, resources.lexicon,
                      config)
    interpretations = finalize(graph, config)
    if graph.truncated:
        print("warning: edge limit reached, interpretations may be incomplete",
              file=sys.stderr)
    if fmt == "json":
        json.dump(_graph_json(graph, interpretations), out, ensure_ascii=False)
        out.write("\n")
        return 0
    for it in interpretations:
        out.write(_interpretation_line(it) + "\n")
    if fmt == "trace":
        out.write("== windows ==\n")
        for (s, e) in sorted(graph.pattern_counts):
            out.write(f"[{s}:{e}] typed-pattern candidates: "
                      f"{graph.pattern_counts[(s, e)]}\n")
        out.write("== discarded ==\n")
        for ev in graph.trace:
            out.write(f"{ev.construction} [{ev.span[0]}:{ev.span[1]}] "
                      f"{ev.kind}: {ev.detail}\n")
    return 0


def cmd_tag(resources: Resources, text: str, fmt: str, out) -> int:
    chart = tagger.tag(text, resources.lexicon)
    if fmt == "json":
        doc = {
            "text": text,
            "tokens": [{"surface": t.surface, "start": t.start, "end": t.end}
                       for t in chart.tokens],
            "spans": [{"start": s.start, "end": s.end,
                       "concepts": [expr_to_json(c) for c in s.concepts]}
                      for s in chart.spans],
        }
        json.dump(doc, out, ensure_ascii=False)
        out.write("\n")
        return 0
    by_span = {(s.start, s.end): s.concepts for s in chart.spans}
    for i, tok in enumerate(chart.tokens):
        concepts = by_span.get((i, i + 1), ())
        out.write("%d:%d\t%s\t%s\n" % (i, i + 1, tok.surface,
                                       ", ".join(print_expr(c) for c in concepts)))
    for (s, e), concepts in sorted(by_span.items()):
        if e - s == 1:
            continue
        surface = " ".join(t.surface for t in chart.tokens[s:e])
        out.write("%d:%d\t%s\t%s\n" % (s, e, surface,
                                       ", ".join(print_expr(c) for c in concepts)))
    return 0


# ---------------------------------------------------------------------------
# Evaluation

@dataclass
class EvalRecord:
    caption_id: str
    text: str
    interpretations: list          # Interpretation, largest span first
    token_count: int

    def interp_id(self, index: int) -> str:
        return f"i{index}"


def build_eval_records(resources: Resources, config: EngineConfig,
                       captions: list) -> list:
    records = []
    for caption_id, text in captions:
        graph = interpret(text, resources.kb, resources.repo,
                          resources.lexicon, config)
        interpretations = finalize(graph, config, maximal_only=False)
        records.append(EvalRecord(caption_id, text, interpretations,
                                  len(graph.tokens)))
    return records


def _interp_length(it: Interpretation, unit: str) -> int:
    if unit == "chars":
        return len(it.text)
    return it.token_length


def evaluate(records: list, verdicts: dict, unit: str = "tokens") -> dict:
    """The three metrics: mean fraction of caption tokens covered by an
    accepted-correct interpretation, the fraction of scored interpretations
    that are correct, and the mean length of correct interpretations.

    Scoring walks each caption's interpretations by span size, largest
    first, and stops at the first size with a correct one."""
    coverage_fractions = []
    scored = 0
    scored_correct = 0
    correct_lengths = []
    for rec in records:
        caption_verdicts = verdicts.get(rec.caption_id, {})
        for i, it in enumerate(rec.interpretations):
            if caption_verdicts.get(rec.interp_id(i)) == "correct":
                correct_lengths.append(_interp_length(it, unit))
        by_size: dict = {}
        for i, it in enumerate(rec.interpretations):
            by_size.setdefault(it.token_length, []).append((rec.interp_id(i), it))
        covered: set = set()
        for size in sorted(by_size, reverse=True):
            accepted = []
            for iid, it in by_size[size]:
                verdict = caption_verdicts.get(iid)
                if verdict in ("correct", "incorrect"):
                    scored += 1
                if verdict == "correct":
                    scored_correct += 1
                    accepted.append(it)
            if accepted:
                for it in accepted:
                    covered.update(range(it.start, it.end))
                break
        fraction = len(covered) / rec.token_count if rec.token_count else 0.0
        coverage_fractions.append(fraction)
    return {
        "captions": len(records),
        "coverage": (sum(coverage_fractions) / len(coverage_fractions)
                     if coverage_fractions else 0.0),
        "precision": scored_correct / scored if scored else 0.0,
        "mean_correct_length": (sum(correct_lengths) / len(correct_lengths)
                                if correct_lengths else 0.0),
        "length_unit": unit,
    }


def read_captions(path: str) -> list:
    captions = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise ResourceError(f"{path}:{lineno}: expected 'id<TAB>text'")
        caption_id, text = line.split("\t", 1)
        captions.append((caption_id.strip(), text))
    return captions


def read_verdicts(path: str, records: list) -> dict:
    known = {rec.caption_id: {rec.interp_id(i)
                              for i in range(len(rec.interpretations))}
             for rec in records}
    verdicts: dict = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2] not in ("correct", "incorrect"):
            raise ResourceError(
                f"{path}:{lineno}: expected 'caption-id interpretation-id "
                f"correct|incorrect'")
        caption_id, interp_id, verdict = parts
        if caption_id not in known:
            raise ResourceError(f"{path}:{lineno}: unknown caption id "
                                f"{caption_id}")
        if interp_id not in known[caption_id]:
            raise ResourceError(f"{path}:{lineno}: unknown interpretation id "
                                f"{interp_id} for caption {caption_id}")
        verdicts.setdefault(caption_id, {})[interp_id] = verdict
    return verdicts


def cmd_eval(resources: Resources, config: EngineConfig, captions_path: str,
             verdicts_path: str | None, unit: str, fmt: str, out) -> int:
    captions = read_captions(captions_path)
    records = build_eval_records(resources, config, captions)
    if verdicts_path is None:
        # scoring worksheet: largest segments first, ready for hand verdicts
        for rec in records:
            out.write(f"caption\t{rec.caption_id}\t{rec.text}\n")
            for i, it in enumerate(rec.interpretations):
                out.write(f"interp\t{rec.caption_id}\t{rec.interp_id(i)}\t"
                          f"[{it.start}:{it.end}]\t{it.token_length}\t"
                          f"{print_expr(it.logic)}\n")
        return 0
    verdicts = read_verdicts(verdicts_path, records)
    metrics = evaluate(records, verdicts, unit)
    if fmt == "json":
        json.dump(metrics, out, ensure_ascii=False)
        out.write("\n")
        return 0
    out.write(f"captions {metrics['captions']}\n")
    out.write(f"coverage {metrics['coverage']:.9f}\n")
    out.write(f"precision {metrics['precision']:.9f}\n")
    out.write(f"mean-correct-length {metrics['mean_correct_length']:.9f} "
              f"({metrics['length_unit']})\n")
    return 0


# ---------------------------------------------------------------------------
# Lint

def run_lint(manifest: RunManifest) -> list:
    _check_paths(manifest.kb_files, "--kb")
    _check_paths(manifest.lexicon_files, "--lexicon")
    _check_paths(manifest.construction_files, "--constructions")
    kb, findings = kbmod.load_kb_lenient(manifest.kb_files)
    lexicon, lex_findings = tagger.load_lexicon_lenient(manifest.lexicon_files)
    repo, cons_findings = cons.load_constructions_lenient(
        manifest.construction_files)
    findings = list(findings) + list(lex_findings) + list(cons_findings)
    findings.extend(kbmod.lint_kb(kb))
    findings.extend(cons.lint_constructions(repo, kb))
    return findings


def cmd_lint(manifest: RunManifest, fmt: str, out) -> int:
    findings = run_lint(manifest)
    if fmt == "json":
        json.dump([{"code": f.code, "message": f.message} for f in findings], out)
        out.write("\n")
        return 3 if findings else 0
    if not findings:
        out.write("no findings\n")
        return 0
    for f in findings:
        out.write(f"{f.code}\t{f.message}\n")
    return 3


# ---------------------------------------------------------------------------
# Argument handling

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_resource_args(p):
    p.add_argument("--kb", action="append", default=[], metavar="FILE",
                   help="KB file (repeatable)")
    p.add_argument("--lexicon", action="append", default=[], metavar="FILE",
                   help="lexicon file (repeatable)")
    p.add_argument("--constructions", action="append", default=[],
                   metavar="FILE", help="construction file (repeatable)")
    p.add_argument("--lang", default="en", help="template language (default en)")
    p.add_argument("--max-window", type=int, default=12,
                   help="maximum window size in tokens (default 12)")
    p.add_argument("--mode", choices=["statement", "question", "check"],
                   default="statement",
                   help="what to do with free variables at the top level")
    p.add_argument("--context", default=None, metavar="OVERLAY",
                   help="application context overlaying the base context")
    p.add_argument("--max-edges", type=int, default=50_000,
                   help="edge safety cap (default 50000)")


def build_parser() -> _Parser:
    parser = _Parser(prog="construe",
                     description="Translate text into logic by matching typed "
                                 "constructions against concept-tagged input.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interpret", help="interpret text")
    _add_resource_args(p)
    p.add_argument("text", nargs="?", help="text to interpret")
    p.add_argument("--file", help="read the text from a file instead")
    p.add_argument("--format", choices=["cycl", "json", "trace"],
                   default="cycl")

    p = sub.add_parser("tag", help="show the concept-tag table")
    _add_resource_args(p)
    p.add_argument("text", help="text to tag")
    p.add_argument("--format", choices=["table", "json"], default="table")

    p = sub.add_parser("eval", help="evaluation worksheet and metrics")
    _add_resource_args(p)
    p.add_argument("captions", help="captions file: 'id<TAB>text' lines")
    p.add_argument("--verdicts", help="verdict file: "
                                      "'caption-id interp-id correct|incorrect'")
    p.add_argument("--length-unit", choices=["tokens", "chars"],
                   default="tokens")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("lint", help="check the loaded resources")
    _add_resource_args(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    return parser


def _config_from(args) -> EngineConfig:
    ctx = ContextStack(overlay=args.context) if args.context else ContextStack()
    return EngineConfig(max_window=args.max_window, language=args.lang,
                        outermost_policy=args.mode, max_edges=args.max_edges,
                        context=ctx)


def _manifest_from(args) -> RunManifest:
    return RunManifest(args.kb, args.lexicon, args.constructions,
                       _config_from(args))


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        manifest = _manifest_from(args)
        if args.command == "lint":
            return cmd_lint(manifest, args.format, out)
        resources = load_resources(manifest)
        if args.command == "interpret":
            if args.file is not None:
                path = Path(args.file)
                if not path.exists():
                    raise ResourceError(f"input file not found: {args.file}")
                text = path.read_text(encoding="utf-8")
            elif args.text is not None:
                text = args.text
            else:
                raise UsageError("interpret needs TEXT or --file")
            return cmd_interpret(resources, manifest.config, text,
                                 args.format, out)
        if args.command == "tag":
            return cmd_tag(resources, args.text, args.format, out)
        if args.command == "eval":
            return cmd_eval(resources, manifest.config, args.captions,
                            args.verdicts, args.length_unit, args.format, out)
        raise UsageError(f"unknown command {args.command}")
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except ResourceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

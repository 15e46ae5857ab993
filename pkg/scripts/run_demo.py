#!/usr/bin/env python3
"""Interpret a handful of phrases against the bundled micro-resources and
show what the engine keeps, what it rejects, and why.

Usage: python scripts/run_demo.py [--trace]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import construe
from construe import EngineConfig, finalize, interpret, load_constructions, \
    load_kb, load_lexicon, print_expr

RES = Path(construe.__file__).parent / "resources"

DEMO_PHRASES = [
    "big blue building",
    "2 sandwiches",
    "Barack Obama eats a sandwich",
    "blowing out candles",
    "blowing out tires",
    "intracellular accumulation",
    "electron transport",
    "white house dancing",
    "a bank is a kind of company",
    "the song has 6 notes",
    "wimbledon , the end of the 2015 season",
]

BIO_PHRASES = ["G12V-K-Ras"]


def show(kb, repo, lexicon, phrases, trace):
    for text in phrases:
        graph = interpret(text, kb, repo, lexicon, EngineConfig())
        print(f"\n>> {text!r}")
        tops = finalize(graph)
        if not tops:
            print("   (no interpretation)")
        for it in tops:
            print(f"   [{it.start}:{it.end}] {print_expr(it.logic)}")
        if trace:
            for ev in graph.trace:
                print(f"   discarded {ev.construction} "
                      f"[{ev.span[0]}:{ev.span[1]}] {ev.kind}: {ev.detail}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trace", action="store_true",
                        help="also list discarded candidates")
    args = parser.parse_args()

    kb = load_kb([RES / "core.kb", RES / "demo.kb"])
    lexicon = load_lexicon([RES / "demo.lex"])
    repo = load_constructions([RES / "demo.cg"])
    print("== general demo ==")
    show(kb, repo, lexicon, DEMO_PHRASES, args.trace)

    bio_kb = load_kb([RES / "core.kb", RES / "bio.kb"])
    bio_lexicon = load_lexicon([RES / "bio.lex"])
    bio_repo = load_constructions([RES / "bio.cg"])
    print("\n== biology demo ==")
    show(bio_kb, bio_repo, bio_lexicon, BIO_PHRASES, args.trace)


if __name__ == "__main__":
    main()

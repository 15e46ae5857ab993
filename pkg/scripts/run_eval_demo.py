#!/usr/bin/env python3
"""Walk the evaluation protocol end to end on the bundled captions:
emit the scoring worksheet, fake a round of human verdicts (accept every
top interpretation), and report the three metrics.

Usage: python scripts/run_eval_demo.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import construe
from construe import EngineConfig, load_constructions, load_kb, load_lexicon, \
    print_expr
from construe.cli import build_eval_records, evaluate, read_captions

RES = Path(construe.__file__).parent / "resources"


def main():
    kb = load_kb([RES / "core.kb", RES / "demo.kb"])
    lexicon = load_lexicon([RES / "demo.lex"])
    repo = load_constructions([RES / "demo.cg"])
    from construe.cli import Resources
    resources = Resources(kb, lexicon, repo)

    captions = read_captions(RES / "captions.tsv")
    records = build_eval_records(resources, EngineConfig(), captions)

    print("== worksheet ==")
    verdicts = {}
    for rec in records:
        print(f"caption {rec.caption_id}: {rec.text}")
        for i, it in enumerate(rec.interpretations):
            print(f"  {rec.interp_id(i)} [{it.start}:{it.end}] "
                  f"{print_expr(it.logic)}")
        if rec.interpretations:
            # pretend the human scorer accepted the largest interpretation
            verdicts[rec.caption_id] = {rec.interp_id(0): "correct"}

    metrics = evaluate(records, verdicts)
    print("\n== metrics ==")
    print(f"captions            {metrics['captions']}")
    print(f"coverage            {metrics['coverage']:.6f}")
    print(f"precision           {metrics['precision']:.6f}")
    print(f"mean correct length {metrics['mean_correct_length']:.6f} "
          f"({metrics['length_unit']})")


if __name__ == "__main__":
    main()

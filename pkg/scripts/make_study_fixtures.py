#!/usr/bin/env python3
"""Build a results directory of finished sessions matching the reference
study's aggregate numbers, then print the analysis over it.

Usage: python scripts/make_study_fixtures.py [outdir]

The generated directory can be fed straight to ``tutor stats <outdir>``.
"""
from __future__ import annotations

import sys
from pathlib import Path

from crosstutor.analytics import render_summary_text, study_summary
from crosstutor.cohort import build_cohort
from crosstutor.model import load_shipped_pack
from crosstutor.store import SessionStore


def main() -> int:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results")
    pack = load_shipped_pack()
    sessions = build_cohort(pack)
    store = SessionStore(outdir)
    for session in sessions:
        store.persist(session)
    print(f"wrote {len(sessions)} session records to {outdir}/")
    print()
    print(render_summary_text(study_summary(sessions, pack)))
    return 0


if __name__ == "__main__":
    sys.exit(main())

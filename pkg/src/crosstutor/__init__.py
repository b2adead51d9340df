"""Cross-language tutoring engine.

Paired-snippet lessons with transfer/gotcha/new-fact annotations, a
pre-test/lessons/post-test/survey session state machine, a negative-transfer
linter, and the study analytics (signed-rank test, delta tables, Likert
summaries). See README for the CLI and HTTP surfaces.
"""

__version__ = "0.1.0"

"""damqa: sliding-window VQA evaluation harness.

Generates full-image and sliding-window views, queries any
vision-language model over a small HTTP wire protocol, fuses per-view
answers with area-weighted voting (with abstention handling), and scores
predictions with the standard benchmark metric suite.
"""

__version__ = "0.1.0"

"""egokit: an offline-testable first-person assistant runtime.

Pieces: a sorted multimodal event log, budgeted context assembly,
multiple-choice answering with prompt ensembling, an allowlisted tool
registry with strict argument validation, a plan/confirm/execute
orchestrator, a vote-stabilized board-game coach, an energy VAD with
barge-in, and a framed full-duplex transport. All model calls go through
provider interfaces with deterministic scripted stubs.
"""

__version__ = "0.1.0"

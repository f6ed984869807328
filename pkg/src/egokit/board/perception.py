"""Temporal stabilization of noisy per-square board observations.

Each frame classifies all 64 squares into the shared 13-class encoding.
A ring buffer of the last N frames is majority-voted per square; a square's
label is committed only when the ring is full and the winning class clears
the stability threshold, otherwise the previously committed label stands.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .movegen import legal_moves
from .search import EngineConfig, best_move
from .state import BoardState, Move, NUM_CLASSES, fen_encode, move_to_coord, start_position

ObservationGrid = np.ndarray  # shape (8, 8), dtype int8, values 0..12


class PerceptionUnstable(RuntimeError):
    pass


def grid_from_state(state: BoardState) -> ObservationGrid:
    return np.array(state.squares, dtype=np.int8).reshape(8, 8)


def state_from_grid(grid: ObservationGrid, meta: BoardState) -> BoardState:
    """Placement from the grid; every non-placement field (side to move,
    castling, en passant, clocks) is carried from tracked game metadata,
    which per-square classification cannot observe."""
    return replace(meta, squares=tuple(int(x) for x in grid.reshape(64)))


def check_grid(grid: ObservationGrid) -> None:
    if grid.shape != (8, 8):
        raise ValueError(f"grid shape {grid.shape}, want (8, 8)")
    if grid.min() < 0 or grid.max() >= NUM_CLASSES:
        raise ValueError("grid holds out-of-range class labels")


@dataclass(frozen=True)
class VoteBuffer:
    """Ring of recent observations plus the last committed labels and the
    tracked non-placement game metadata."""

    n: int
    tau: float
    previous: ObservationGrid
    ring: tuple[ObservationGrid, ...] = ()
    meta: BoardState = field(default_factory=start_position)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("buffer size must be >= 1")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau {self.tau} outside (0, 1]")

    @property
    def full(self) -> bool:
        return len(self.ring) == self.n

    @classmethod
    def start(cls, initial: BoardState, n: int = 5, tau: float = 0.6) -> "VoteBuffer":
        return cls(n=n, tau=tau, previous=grid_from_state(initial), meta=initial)


def vote_grids(grids: tuple[ObservationGrid, ...]) -> tuple[ObservationGrid, ObservationGrid]:
    """Per-square (winning class, vote count) over the stacked grids.
    Ties go to the lowest class index."""
    stack = np.stack(grids)
    counts = np.stack([(stack == c).sum(axis=0) for c in range(NUM_CLASSES)])
    winners = counts.argmax(axis=0).astype(np.int8)
    return winners, counts.max(axis=0)


def push_and_commit(buf: VoteBuffer, grid: ObservationGrid) -> tuple[VoteBuffer, ObservationGrid]:
    """Add a frame and recompute the committed labels."""
    check_grid(grid)
    ring = (buf.ring + (grid.astype(np.int8),))[-buf.n :]
    if len(ring) < buf.n:
        return replace(buf, ring=ring), buf.previous.copy()
    winners, top_counts = vote_grids(ring)
    stable = top_counts / buf.n >= buf.tau
    committed = np.where(stable, winners, buf.previous).astype(np.int8)
    return replace(buf, previous=committed, ring=ring), committed.copy()


def simulate_observation(
    true_state: BoardState,
    noise_rate: float,
    seed: int | np.random.Generator,
) -> ObservationGrid:
    """Noisy classifier stand-in: each square independently flips to a
    uniformly random *different* class with probability ``noise_rate``."""
    if not 0.0 <= noise_rate <= 1.0:
        raise ValueError(f"noise_rate {noise_rate} outside [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    grid = grid_from_state(true_state)
    flips = rng.random((8, 8)) < noise_rate
    offsets = rng.integers(1, NUM_CLASSES, size=(8, 8), dtype=np.int8)
    noisy = (grid + offsets) % NUM_CLASSES
    return np.where(flips, noisy, grid).astype(np.int8)


def coach_prompt(move: Move, state: BoardState) -> str:
    return (
        f"As a board-game coach, explain the idea behind move {move_to_coord(move)} "
        f"given the current position. Position: {fen_encode(state)}"
    )


def execute_board_tool(
    frames: list[ObservationGrid],
    buf: VoteBuffer,
    cfg: EngineConfig,
    lm,
) -> tuple[str, VoteBuffer]:
    """Run the full hybrid pipeline: stabilize the frames, search the
    committed position, and have the language model explain the move.
    The advice always names the move in coordinate notation."""
    committed = buf.previous
    for grid in frames:
        buf, committed = push_and_commit(buf, grid)
    if not buf.full:
        raise PerceptionUnstable(f"only {len(buf.ring)} of {buf.n} frames buffered")
    state = state_from_grid(committed, meta=buf.meta)
    try:
        state.validate_kings()
    except Exception as exc:
        raise PerceptionUnstable(f"committed board is invalid: {exc}") from exc
    if not legal_moves(state):
        raise PerceptionUnstable("committed board has no legal moves")
    move, score = best_move(state, cfg)
    explanation = lm(coach_prompt(move, state))
    return (
        f"Suggested move {move_to_coord(move)} (score {score:+.1f}). {explanation}",
        buf,
    )

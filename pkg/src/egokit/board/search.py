"""Fixed-depth alpha-beta search over a material + mobility evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field

from .movegen import apply_move, in_check, legal_moves, mobility
from .state import BLACK, WHITE, BoardState, Move, is_white_piece

MATE_SCORE = 10_000.0
_INF = float("inf")

MATERIAL = {1: 1.0, 2: 3.0, 3: 3.0, 4: 5.0, 5: 9.0, 6: 0.0}


@dataclass(frozen=True)
class EngineConfig:
    depth: int = 3
    material: dict[int, float] = field(default_factory=lambda: dict(MATERIAL))
    mobility_weight: float = 0.1

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")


class NoLegalMoves(RuntimeError):
    pass


def _flip_side(state: BoardState) -> BoardState:
    other = BLACK if state.side_to_move == WHITE else WHITE
    # ep target is meaningless for the other side; drop it for counting
    return BoardState(state.squares, other, state.castling, None, state.halfmove, state.fullmove)


def evaluate(state: BoardState, cfg: EngineConfig) -> float:
    """Static score from the mover's perspective: material difference plus
    a small mobility (pseudo-legal move count) difference."""
    mover_white = state.side_to_move == WHITE
    material = 0.0
    for p in state.squares:
        if p == 0:
            continue
        value = cfg.material[p if is_white_piece(p) else p - 6]
        material += value if is_white_piece(p) == mover_white else -value
    mob = mobility(state) - mobility(_flip_side(state))
    return material + cfg.mobility_weight * mob


def _negamax(state: BoardState, depth: int, alpha: float, beta: float, ply: int, cfg: EngineConfig) -> float:
    moves = legal_moves(state)
    if not moves:
        return -(MATE_SCORE - ply) if in_check(state) else 0.0
    if depth == 0:
        return evaluate(state, cfg)
    best = -_INF
    for m in moves:
        value = -_negamax(apply_move(state, m), depth - 1, -beta, -alpha, ply + 1, cfg)
        if value > best:
            best = value
            if value > alpha:
                alpha = value
                if alpha >= beta:
                    break
    return best


def best_move(state: BoardState, cfg: EngineConfig = EngineConfig()) -> tuple[Move, float]:
    """Deterministic (move, score) for the side to move; among equal scores
    the first move in generation order wins."""
    moves = legal_moves(state)
    if not moves:
        raise NoLegalMoves(f"no legal moves for {state.side_to_move}")
    best: Move | None = None
    best_score = -_INF
    for m in moves:
        value = -_negamax(apply_move(state, m), cfg.depth - 1, -_INF, -best_score, 1, cfg)
        if value > best_score:
            best_score = value
            best = m
    assert best is not None
    return best, best_score

from .movegen import apply_move, in_check, is_attacked, legal_moves, mobility, perft
from .perception import (
    ObservationGrid,
    PerceptionUnstable,
    VoteBuffer,
    coach_prompt,
    execute_board_tool,
    grid_from_state,
    push_and_commit,
    simulate_observation,
    state_from_grid,
    vote_grids,
)
from .search import EngineConfig, MATE_SCORE, NoLegalMoves, best_move, evaluate
from .state import (
    BLACK,
    EMPTY,
    NUM_CLASSES,
    PIECE_CHARS,
    START_FEN,
    WHITE,
    BoardState,
    FenParseError,
    InvalidPosition,
    Move,
    coord_to_move,
    fen_decode,
    fen_encode,
    mirror,
    move_to_coord,
    sq_name,
    start_position,
)

__all__ = [
    "BLACK",
    "BoardState",
    "EMPTY",
    "EngineConfig",
    "FenParseError",
    "InvalidPosition",
    "MATE_SCORE",
    "Move",
    "NUM_CLASSES",
    "NoLegalMoves",
    "ObservationGrid",
    "PIECE_CHARS",
    "PerceptionUnstable",
    "START_FEN",
    "VoteBuffer",
    "WHITE",
    "apply_move",
    "best_move",
    "coach_prompt",
    "coord_to_move",
    "evaluate",
    "execute_board_tool",
    "fen_decode",
    "fen_encode",
    "grid_from_state",
    "in_check",
    "is_attacked",
    "legal_moves",
    "mirror",
    "mobility",
    "move_to_coord",
    "perft",
    "push_and_commit",
    "simulate_observation",
    "sq_name",
    "start_position",
    "state_from_grid",
    "vote_grids",
]

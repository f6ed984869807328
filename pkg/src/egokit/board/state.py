"""Board representation, moves, and FEN round-tripping.

Squares are indexed rank-major from white's side: a1=0, h1=7, a8=56, h8=63.
Piece classes share one 13-value encoding with the perception layer:
0 = empty, 1-6 = white PNBRQK, 7-12 = black pnbrqk.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

EMPTY = 0
WP, WN, WB, WR, WQ, WK = 1, 2, 3, 4, 5, 6
BP, BN, BB, BR, BQ, BK = 7, 8, 9, 10, 11, 12
NUM_CLASSES = 13

PIECE_CHARS = ".PNBRQKpnbrqk"
CHAR_TO_PIECE = {c: i for i, c in enumerate(PIECE_CHARS) if c != "."}

WHITE = "w"
BLACK = "b"

START_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

_CASTLING_ORDER = "KQkq"


class FenParseError(ValueError):
    def __init__(self, message: str, field: int):
        super().__init__(f"field {field}: {message}")
        self.field = field


class InvalidPosition(ValueError):
    pass


def is_white_piece(p: int) -> bool:
    return 1 <= p <= 6

def is_black_piece(p: int) -> bool:
    return 7 <= p <= 12

def piece_color(p: int) -> str | None:
    if is_white_piece(p):
        return WHITE
    if is_black_piece(p):
        return BLACK
    return None

def sq_index(file: int, rank: int) -> int:
    return rank * 8 + file

def sq_file(sq: int) -> int:
    return sq % 8

def sq_rank(sq: int) -> int:
    return sq // 8

def sq_name(sq: int) -> str:
    return "abcdefgh"[sq % 8] + str(sq // 8 + 1)

def name_to_sq(name: str) -> int:
    if len(name) != 2 or name[0] not in "abcdefgh" or name[1] not in "12345678":
        raise ValueError(f"bad square name {name!r}")
    return (int(name[1]) - 1) * 8 + "abcdefgh".index(name[0])


class Move(NamedTuple):
    from_sq: int
    to_sq: int
    promotion: str | None = None  # 'n' | 'b' | 'r' | 'q'


def move_to_coord(m: Move) -> str:
    return sq_name(m.from_sq) + sq_name(m.to_sq) + (m.promotion or "")


def coord_to_move(text: str) -> Move:
    if len(text) not in (4, 5):
        raise ValueError(f"bad move {text!r}")
    promotion = text[4] if len(text) == 5 else None
    if promotion is not None and promotion not in "nbrq":
        raise ValueError(f"bad promotion {promotion!r}")
    return Move(name_to_sq(text[:2]), name_to_sq(text[2:4]), promotion)


@dataclass(frozen=True)
class BoardState:
    squares: tuple[int, ...]  # 64 piece classes
    side_to_move: str = WHITE
    castling: str = ""  # subset of "KQkq" in canonical order, "" if none
    ep_square: int | None = None
    halfmove: int = 0
    fullmove: int = 1

    def piece_at(self, sq: int) -> int:
        return self.squares[sq]

    def king_square(self, color: str) -> int:
        king = WK if color == WHITE else BK
        return self.squares.index(king)

    def validate_kings(self) -> None:
        if self.squares.count(WK) != 1 or self.squares.count(BK) != 1:
            raise InvalidPosition(
                f"king counts: white={self.squares.count(WK)}, "
                f"black={self.squares.count(BK)}"
            )


def fen_encode(state: BoardState) -> str:
    ranks = []
    for rank in range(7, -1, -1):
        run = 0
        text = ""
        for file in range(8):
            p = state.squares[sq_index(file, rank)]
            if p == EMPTY:
                run += 1
            else:
                if run:
                    text += str(run)
                    run = 0
                text += PIECE_CHARS[p]
        if run:
            text += str(run)
        ranks.append(text)
    castling = state.castling or "-"
    ep = sq_name(state.ep_square) if state.ep_square is not None else "-"
    return (
        f"{'/'.join(ranks)} {state.side_to_move} {castling} {ep} "
        f"{state.halfmove} {state.fullmove}"
    )


def fen_decode(text: str) -> BoardState:
    fields = text.split()
    if len(fields) != 6:
        raise FenParseError(f"expected 6 fields, got {len(fields)}", min(len(fields), 5))
    placement, side, castling, ep, halfmove, fullmove = fields

    rank_texts = placement.split("/")
    if len(rank_texts) != 8:
        raise FenParseError(f"expected 8 ranks, got {len(rank_texts)}", 0)
    squares = [EMPTY] * 64
    for i, rank_text in enumerate(rank_texts):
        rank = 7 - i
        file = 0
        for ch in rank_text:
            if ch.isdigit():
                n = int(ch)
                if not 1 <= n <= 8:
                    raise FenParseError(f"bad empty run {ch!r}", 0)
                file += n
            elif ch in CHAR_TO_PIECE:
                if file > 7:
                    raise FenParseError(f"rank {rank + 1} overflows", 0)
                squares[sq_index(file, rank)] = CHAR_TO_PIECE[ch]
                file += 1
            else:
                raise FenParseError(f"bad piece char {ch!r}", 0)
        if file != 8:
            raise FenParseError(f"rank {rank + 1} sums to {file}, want 8", 0)

    if side not in (WHITE, BLACK):
        raise FenParseError(f"bad side {side!r}", 1)

    if castling != "-":
        seen = set()
        for ch in castling:
            if ch not in _CASTLING_ORDER or ch in seen:
                raise FenParseError(f"bad castling {castling!r}", 2)
            seen.add(ch)
        castling = "".join(c for c in _CASTLING_ORDER if c in seen)
    else:
        castling = ""

    ep_square: int | None = None
    if ep != "-":
        try:
            ep_square = name_to_sq(ep)
        except ValueError:
            raise FenParseError(f"bad en-passant square {ep!r}", 3) from None
        if sq_rank(ep_square) not in (2, 5):
            raise FenParseError(f"en-passant square {ep!r} not on rank 3/6", 3)

    try:
        half = int(halfmove)
        if half < 0:
            raise ValueError
    except ValueError:
        raise FenParseError(f"bad halfmove clock {halfmove!r}", 4) from None
    try:
        full = int(fullmove)
        if full < 1:
            raise ValueError
    except ValueError:
        raise FenParseError(f"bad fullmove number {fullmove!r}", 5) from None

    return BoardState(tuple(squares), side, castling, ep_square, half, full)


def start_position() -> BoardState:
    return fen_decode(START_FEN)


def mirror(state: BoardState) -> BoardState:
    """Color-flip: swap piece colors, reflect ranks, swap castling case,
    mirror the en-passant square, flip the side to move."""
    squares = [EMPTY] * 64
    for sq, p in enumerate(state.squares):
        if p == EMPTY:
            continue
        flipped = p + 6 if is_white_piece(p) else p - 6
        squares[sq_index(sq_file(sq), 7 - sq_rank(sq))] = flipped
    castling = "".join(
        c for c in _CASTLING_ORDER if c.swapcase() in state.castling
    )
    ep = None
    if state.ep_square is not None:
        ep = sq_index(sq_file(state.ep_square), 7 - sq_rank(state.ep_square))
    return BoardState(
        tuple(squares),
        BLACK if state.side_to_move == WHITE else WHITE,
        castling,
        ep,
        state.halfmove,
        state.fullmove,
    )

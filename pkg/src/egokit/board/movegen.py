"""Legal move generation under standard rules.

Pseudo-legal generation plus a make-and-test legality filter; castling is
generated separately with its path and check conditions. Attack lookups run
over per-square tables precomputed at import. Output order is fixed
(from-square, to-square, promotion) so everything downstream is
deterministic.
"""
from __future__ import annotations

from .state import (
    BLACK,
    BP,
    BB,
    BK,
    BN,
    BQ,
    BR,
    EMPTY,
    WHITE,
    WB,
    WK,
    WN,
    WP,
    WQ,
    WR,
    BoardState,
    Move,
)

PROMOTION_PIECES = ("b", "n", "q", "r")

_PROMOTE_WHITE = {"n": WN, "b": WB, "r": WR, "q": WQ}
_PROMOTE_BLACK = {"n": BN, "b": BB, "r": BR, "q": BQ}

_KNIGHT_DELTAS = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))
_KING_DELTAS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_BISHOP_DIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
_ROOK_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _build_tables():
    knight, king = [], []
    bishop_rays, rook_rays = [], []
    pawn_attack_sources_white, pawn_attack_sources_black = [], []
    for sq in range(64):
        f, r = sq % 8, sq // 8
        knight.append(
            tuple(
                (r + dr) * 8 + (f + df)
                for df, dr in _KNIGHT_DELTAS
                if 0 <= f + df < 8 and 0 <= r + dr < 8
            )
        )
        king.append(
            tuple(
                (r + dr) * 8 + (f + df)
                for df, dr in _KING_DELTAS
                if 0 <= f + df < 8 and 0 <= r + dr < 8
            )
        )
        rays = []
        for df, dr in _BISHOP_DIRS:
            ray = []
            nf, nr = f + df, r + dr
            while 0 <= nf < 8 and 0 <= nr < 8:
                ray.append(nr * 8 + nf)
                nf += df
                nr += dr
            if ray:
                rays.append(tuple(ray))
        bishop_rays.append(tuple(rays))
        rays = []
        for df, dr in _ROOK_DIRS:
            ray = []
            nf, nr = f + df, r + dr
            while 0 <= nf < 8 and 0 <= nr < 8:
                ray.append(nr * 8 + nf)
                nf += df
                nr += dr
            if ray:
                rays.append(tuple(ray))
        rook_rays.append(tuple(rays))
        # squares a pawn of each color would attack this square from
        pawn_attack_sources_white.append(
            tuple(
                (r - 1) * 8 + (f + df)
                for df in (-1, 1)
                if 0 <= f + df < 8 and r - 1 >= 0
            )
        )
        pawn_attack_sources_black.append(
            tuple(
                (r + 1) * 8 + (f + df)
                for df in (-1, 1)
                if 0 <= f + df < 8 and r + 1 <= 7
            )
        )
    return (
        tuple(knight),
        tuple(king),
        tuple(bishop_rays),
        tuple(rook_rays),
        tuple(pawn_attack_sources_white),
        tuple(pawn_attack_sources_black),
    )


(
    KNIGHT_TO,
    KING_TO,
    BISHOP_RAYS,
    ROOK_RAYS,
    _WP_SOURCES,
    _BP_SOURCES,
) = _build_tables()


def is_attacked(squares, sq: int, by_white: bool) -> bool:
    if by_white:
        pawn, knight, bishop, rook, queen, king = WP, WN, WB, WR, WQ, WK
        pawn_sources = _WP_SOURCES[sq]
    else:
        pawn, knight, bishop, rook, queen, king = BP, BN, BB, BR, BQ, BK
        pawn_sources = _BP_SOURCES[sq]
    for src in pawn_sources:
        if squares[src] == pawn:
            return True
    for src in KNIGHT_TO[sq]:
        if squares[src] == knight:
            return True
    for src in KING_TO[sq]:
        if squares[src] == king:
            return True
    for ray in BISHOP_RAYS[sq]:
        for src in ray:
            p = squares[src]
            if p != EMPTY:
                if p == bishop or p == queen:
                    return True
                break
    for ray in ROOK_RAYS[sq]:
        for src in ray:
            p = squares[src]
            if p != EMPTY:
                if p == rook or p == queen:
                    return True
                break
    return False


def in_check(state: BoardState) -> bool:
    king_sq = state.king_square(state.side_to_move)
    return is_attacked(state.squares, king_sq, by_white=state.side_to_move == BLACK)


def _gen_pawn(moves, squares, sq, white, ep_square):
    f, r = sq % 8, sq // 8
    if white:
        one = sq + 8
        last = 7
        start = 1
        low, high = 7, 13  # enemy piece class range
    else:
        one = sq - 8
        last = 0
        start = 6
        low, high = 1, 7
    if squares[one] == EMPTY:
        if one // 8 == last:
            for promo in PROMOTION_PIECES:
                moves.append(Move(sq, one, promo))
        else:
            moves.append(Move(sq, one))
            if r == start:
                two = one + 8 if white else one - 8
                if squares[two] == EMPTY:
                    moves.append(Move(sq, two))
    for df in (-1, 1):
        nf = f + df
        if not 0 <= nf < 8:
            continue
        target = one - f + nf
        tp = squares[target]
        if low <= tp < high:
            if target // 8 == last:
                for promo in PROMOTION_PIECES:
                    moves.append(Move(sq, target, promo))
            else:
                moves.append(Move(sq, target))
        elif target == ep_square:
            moves.append(Move(sq, target))


def pseudo_moves(state: BoardState) -> list[Move]:
    """Pseudo-legal moves excluding castling (which is generated with its
    own legality conditions); may leave the king in check."""
    moves: list[Move] = []
    white = state.side_to_move == WHITE
    squares = state.squares
    own_low, own_high = (1, 7) if white else (7, 13)
    for sq in range(64):
        p = squares[sq]
        if p == EMPTY or not own_low <= p < own_high:
            continue
        if p == WP or p == BP:
            _gen_pawn(moves, squares, sq, white, state.ep_square)
        elif p == WN or p == BN:
            for target in KNIGHT_TO[sq]:
                if not own_low <= squares[target] < own_high:
                    moves.append(Move(sq, target))
        elif p == WK or p == BK:
            for target in KING_TO[sq]:
                if not own_low <= squares[target] < own_high:
                    moves.append(Move(sq, target))
        else:
            if p == WB or p == BB:
                ray_sets = (BISHOP_RAYS[sq],)
            elif p == WR or p == BR:
                ray_sets = (ROOK_RAYS[sq],)
            else:
                ray_sets = (BISHOP_RAYS[sq], ROOK_RAYS[sq])
            for rays in ray_sets:
                for ray in rays:
                    for target in ray:
                        tp = squares[target]
                        if tp == EMPTY:
                            moves.append(Move(sq, target))
                            continue
                        if not own_low <= tp < own_high:
                            moves.append(Move(sq, target))
                        break
    return moves


def mobility(state: BoardState) -> int:
    """Pseudo-legal move count for the side to move (castling excluded);
    same rules as pseudo_moves without building move objects."""
    count = 0
    white = state.side_to_move == WHITE
    squares = state.squares
    ep_square = state.ep_square
    own_low, own_high = (1, 7) if white else (7, 13)
    enemy_low, enemy_high = (7, 13) if white else (1, 7)
    for sq in range(64):
        p = squares[sq]
        if p == EMPTY or not own_low <= p < own_high:
            continue
        if p == WP or p == BP:
            f, r = sq % 8, sq // 8
            one = sq + 8 if white else sq - 8
            last = 7 if white else 0
            start = 1 if white else 6
            if squares[one] == EMPTY:
                count += 4 if one // 8 == last else 1
                if r == start:
                    two = one + 8 if white else one - 8
                    if squares[two] == EMPTY:
                        count += 1
            for df in (-1, 1):
                nf = f + df
                if not 0 <= nf < 8:
                    continue
                target = one - f + nf
                tp = squares[target]
                if enemy_low <= tp < enemy_high:
                    count += 4 if target // 8 == last else 1
                elif target == ep_square:
                    count += 1
        elif p == WN or p == BN:
            for target in KNIGHT_TO[sq]:
                if not own_low <= squares[target] < own_high:
                    count += 1
        elif p == WK or p == BK:
            for target in KING_TO[sq]:
                if not own_low <= squares[target] < own_high:
                    count += 1
        else:
            if p == WB or p == BB:
                ray_sets = (BISHOP_RAYS[sq],)
            elif p == WR or p == BR:
                ray_sets = (ROOK_RAYS[sq],)
            else:
                ray_sets = (BISHOP_RAYS[sq], ROOK_RAYS[sq])
            for rays in ray_sets:
                for ray in rays:
                    for target in ray:
                        tp = squares[target]
                        if tp == EMPTY:
                            count += 1
                            continue
                        if not own_low <= tp < own_high:
                            count += 1
                        break
    return count


def _castling_moves(state: BoardState) -> list[Move]:
    moves: list[Move] = []
    squares = state.squares
    white = state.side_to_move == WHITE
    enemy_white = not white
    king_sq = 4 if white else 60
    if squares[king_sq] != (WK if white else BK):
        return moves
    if is_attacked(squares, king_sq, enemy_white):
        return moves
    rights = state.castling
    rook = WR if white else BR
    kingside, queenside = ("K", "Q") if white else ("k", "q")
    if kingside in rights and squares[king_sq + 3] == rook:
        if squares[king_sq + 1] == EMPTY and squares[king_sq + 2] == EMPTY:
            if not is_attacked(squares, king_sq + 1, enemy_white) and not is_attacked(
                squares, king_sq + 2, enemy_white
            ):
                moves.append(Move(king_sq, king_sq + 2))
    if queenside in rights and squares[king_sq - 4] == rook:
        if (
            squares[king_sq - 1] == EMPTY
            and squares[king_sq - 2] == EMPTY
            and squares[king_sq - 3] == EMPTY
        ):
            if not is_attacked(squares, king_sq - 1, enemy_white) and not is_attacked(
                squares, king_sq - 2, enemy_white
            ):
                moves.append(Move(king_sq, king_sq - 2))
    return moves


_RIGHTS_MASK = {0: "Q", 7: "K", 56: "q", 63: "k"}


def apply_move(state: BoardState, m: Move) -> BoardState:
    squares = list(state.squares)
    p = squares[m.from_sq]
    captured = squares[m.to_sq]
    white = state.side_to_move == WHITE

    squares[m.from_sq] = EMPTY
    squares[m.to_sq] = p

    ep_square = None
    if p == WP or p == BP:
        if (
            m.to_sq == state.ep_square
            and captured == EMPTY
            and m.from_sq % 8 != m.to_sq % 8
        ):
            # en-passant: the captured pawn sits behind the target square
            behind = m.to_sq - 8 if white else m.to_sq + 8
            squares[behind] = EMPTY
            captured = WP  # marks a capture for the halfmove clock
        if m.to_sq - m.from_sq in (16, -16):
            ep_square = (m.from_sq + m.to_sq) // 2
        if m.promotion:
            squares[m.to_sq] = (_PROMOTE_WHITE if white else _PROMOTE_BLACK)[m.promotion]
    elif (p == WK or p == BK) and m.to_sq - m.from_sq in (2, -2):
        if m.to_sq > m.from_sq:  # kingside: rook h -> f
            squares[m.from_sq + 1] = squares[m.from_sq + 3]
            squares[m.from_sq + 3] = EMPTY
        else:  # queenside: rook a -> d
            squares[m.from_sq - 1] = squares[m.from_sq - 4]
            squares[m.from_sq - 4] = EMPTY

    castling = state.castling
    if castling:
        if p == WK:
            castling = castling.replace("K", "").replace("Q", "")
        elif p == BK:
            castling = castling.replace("k", "").replace("q", "")
        # any move from or onto a corner square retires that corner's right
        for corner in (m.from_sq, m.to_sq):
            right = _RIGHTS_MASK.get(corner)
            if right:
                castling = castling.replace(right, "")

    halfmove = 0 if (p == WP or p == BP or captured != EMPTY) else state.halfmove + 1
    return BoardState(
        tuple(squares),
        BLACK if white else WHITE,
        castling,
        ep_square,
        halfmove,
        state.fullmove + (0 if white else 1),
    )


def legal_moves(state: BoardState) -> list[Move]:
    """All legal moves in deterministic order."""
    state.validate_kings()
    mover = state.side_to_move
    enemy_is_white = mover == BLACK
    king_piece = BK if enemy_is_white else WK
    legal = []
    for m in pseudo_moves(state):
        child = apply_move(state, m)
        king_sq = child.squares.index(king_piece)
        if not is_attacked(child.squares, king_sq, enemy_is_white):
            legal.append(m)
    legal.extend(_castling_moves(state))
    legal.sort(key=_move_key)
    return legal


def _move_key(m: Move):
    return (m.from_sq, m.to_sq, m.promotion or "")


def perft(state: BoardState, depth: int) -> int:
    if depth == 0:
        return 1
    total = 0
    for m in legal_moves(state):
        total += perft(apply_move(state, m), depth - 1)
    return total

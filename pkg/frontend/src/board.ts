// FEN placement parsing for the board view. Rendering only: the client has
// no game logic and never validates legality.

const GLYPHS: Record<string, string> = {
  P: "♙", N: "♘", B: "♗", R: "♖", Q: "♕", K: "♔",
  p: "♟", n: "♞", b: "♝", r: "♜", q: "♛", k: "♚",
};

export interface BoardModel {
  /** 8 ranks from rank 8 down to rank 1, each 8 cells; "" for empty. */
  ranks: string[][];
  sideToMove: "w" | "b" | null;
}

export function parseFen(fen: string): BoardModel {
  const fields = fen.trim().split(/\s+/);
  const placement = fields[0];
  if (!placement) throw new Error("empty FEN");
  const rows = placement.split("/");
  if (rows.length !== 8) throw new Error(`expected 8 ranks, got ${rows.length}`);
  const ranks: string[][] = [];
  for (const row of rows) {
    const cells: string[] = [];
    for (const ch of row) {
      if (ch >= "1" && ch <= "8") {
        for (let i = 0; i < Number(ch); i++) cells.push("");
      } else if (ch in GLYPHS) {
        cells.push(ch);
      } else {
        throw new Error(`bad piece character ${ch}`);
      }
    }
    if (cells.length !== 8) throw new Error(`rank "${row}" does not sum to 8`);
    ranks.push(cells);
  }
  const side = fields[1] === "w" || fields[1] === "b" ? fields[1] : null;
  return { ranks, sideToMove: side };
}

export function pieceGlyph(piece: string): string {
  return GLYPHS[piece] ?? "";
}

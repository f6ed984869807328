"""Built-in tools backed by static tables and in-memory stores.

These give the planner something real to call offline: fact lookups from
frozen tables, a calendar that requires confirmation (side-effecting), and
quick notes. The board coach is wired in separately because it needs an
engine config and a language model.
"""
from __future__ import annotations

from typing import Any

from . import board
from .providers import LanguageModelProvider
from .registry import Param, ToolRegistry, ToolSchema

NUTRITION_KCAL = {
    "apple": 95,
    "banana": 105,
    "orange": 62,
    "egg": 78,
    "rice": 205,
    "bread": 79,
}

WEATHER = {
    "london": "cloudy, 16 C",
    "shenzhen": "humid, 31 C",
    "tokyo": "clear, 24 C",
    "berlin": "rain, 14 C",
}


class CalendarStore:
    def __init__(self) -> None:
        self.entries: list[dict[str, str]] = []

    def add(self, title: str, when: str) -> dict[str, Any]:
        self.entries.append({"title": title, "when": when})
        return {"added": title, "when": when, "count": len(self.entries)}


class MemoStore:
    def __init__(self) -> None:
        self.memos: list[str] = []

    def add(self, text: str) -> dict[str, Any]:
        self.memos.append(text)
        return {"added": text, "count": len(self.memos)}

    def list_all(self) -> list[str]:
        return list(self.memos)


def _nutrition_lookup(args: dict[str, Any]) -> dict[str, Any]:
    food = args["food"].strip().lower()
    if food not in NUTRITION_KCAL:
        raise KeyError(f"no nutrition data for {food!r}")
    return {"food": food, "kcal": NUTRITION_KCAL[food]}


def _weather_lookup(args: dict[str, Any]) -> dict[str, Any]:
    city = args["city"].strip().lower()
    if city not in WEATHER:
        raise KeyError(f"no weather data for {city!r}")
    return {"city": city, "conditions": WEATHER[city]}


def register_builtin_tools(
    registry: ToolRegistry,
    lm: LanguageModelProvider | None = None,
    engine_cfg: board.EngineConfig | None = None,
) -> tuple[CalendarStore, MemoStore]:
    """Register the standard tool set; returns the mutable stores so tests
    and sessions can inspect side effects."""
    calendar = CalendarStore()
    memos = MemoStore()

    registry.register_tool(
        ToolSchema(
            "nutrition.lookup",
            "Look up the calorie count of a common food item.",
            (Param("food", "text", description="food name, e.g. 'apple'"),),
        ),
        _nutrition_lookup,
    )
    registry.register_tool(
        ToolSchema(
            "weather.lookup",
            "Look up current conditions for a city from the static table.",
            (Param("city", "text", description="city name"),),
        ),
        _weather_lookup,
    )
    registry.register_tool(
        ToolSchema(
            "calendar.add",
            "Add an entry to the calendar. Requires user confirmation.",
            (
                Param("title", "text", description="what to schedule"),
                Param("when", "text", description="natural-language time, e.g. '3 PM'"),
            ),
            side_effecting=True,
        ),
        lambda args: calendar.add(args["title"], args["when"]),
    )
    registry.register_tool(
        ToolSchema(
            "memo.add",
            "Store a short note. Requires user confirmation.",
            (Param("text", "text", description="note body"),),
            side_effecting=True,
        ),
        lambda args: memos.add(args["text"]),
    )
    registry.register_tool(
        ToolSchema(
            "memo.list",
            "List all stored notes.",
            (),
        ),
        lambda args: memos.list_all(),
    )

    cfg = engine_cfg or board.EngineConfig()

    def _suggest_move(args: dict[str, Any]) -> dict[str, Any]:
        state = board.fen_decode(args["fen"])
        depth = args.get("depth", cfg.depth)
        move, score = board.best_move(state, board.EngineConfig(depth=depth))
        explanation = ""
        if lm is not None:
            explanation = lm(board.coach_prompt(move, state))
        return {
            "move": board.move_to_coord(move),
            "score": score,
            "fen": args["fen"],
            "explanation": explanation,
        }

    registry.register_tool(
        ToolSchema(
            "board.suggest_move",
            "Suggest the engine's best move for a chess position.",
            (
                Param("fen", "text", description="position in FEN"),
                Param("depth", "integer", required=False, description="search depth in plies"),
            ),
        ),
        _suggest_move,
    )
    return calendar, memos

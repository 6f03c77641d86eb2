"""Plain-text report tables.

Both reports share one shape: a scenario block per column group, each with
left/center/right gaze sub-columns, plus one trailing summary column.
"""

from __future__ import annotations

GAZE_ORDER = ("left", "center", "right")
LABEL_WIDTH = 14
CELL_WIDTH = 9
TRAIL_WIDTH = 11


def scenario_order(tags) -> list[str]:
    """Interior before exterior, then anything else alphabetically."""
    known = [t for t in ("interior", "exterior") if t in tags]
    extra = sorted(t for t in tags if t not in ("interior", "exterior"))
    return known + extra


def _block(values: list[str]) -> str:
    return "".join(v.rjust(CELL_WIDTH) for v in values) + " "


def render_block_table(
    corner: str,
    sub_header_label: str,
    groups: list[str],
    rows: list[tuple[str, dict[tuple[str, str], str], str]],
    trailing_header: str,
    footer: tuple[str, dict[str, str], str] | None = None,
) -> str:
    """Render the shared block layout.

    rows: (label, {(group, gaze): cell text}, trailing text).
    footer: optional (label, {group: centered text}, trailing text) row.
    """
    block_width = CELL_WIDTH * len(GAZE_ORDER) + 1
    lines = []
    head = corner.ljust(LABEL_WIDTH) + "|"
    for group in groups:
        head += group.capitalize().center(block_width) + "|"
    head += "".rjust(TRAIL_WIDTH)
    lines.append(head.rstrip())

    sub = sub_header_label.ljust(LABEL_WIDTH) + "|"
    for _ in groups:
        sub += _block(list(GAZE_ORDER)) + "|"
    sub += trailing_header.rjust(TRAIL_WIDTH)
    lines.append(sub)

    sep = "-" * LABEL_WIDTH + "+" + ("-" * block_width + "+") * len(groups)
    sep += "-" * TRAIL_WIDTH
    lines.append(sep)

    for label, cells, trailing in rows:
        line = label.ljust(LABEL_WIDTH) + "|"
        for group in groups:
            line += _block([cells.get((group, g), "-") for g in GAZE_ORDER]) + "|"
        line += trailing.rjust(TRAIL_WIDTH)
        lines.append(line.rstrip())

    if footer is not None:
        lines.append(sep)
        label, per_group, trailing = footer
        line = label.ljust(LABEL_WIDTH) + "|"
        for group in groups:
            line += per_group.get(group, "-").center(block_width) + "|"
        line += trailing.rjust(TRAIL_WIDTH)
        lines.append(line.rstrip())

    return "\n".join(lines) + "\n"

"""The published key-code table for recorded key press events.

Codes are ASCII for printable keys (Shift+f is recorded as 'F'). External
recordings using a different table can be parsed with a remapping file:
a JSON object of {"<recorded code>": <canonical code>}.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Union

KEY_ACTIONS: Dict[str, int] = {
    "pause_toggle": ord(" "),
    "quit": ord("q"),
    "save_yes": ord("y"),
    "save_no": ord("n"),
    "confirm_enter": 13,
    "show_pet": ord("p"),
    "show_ct": ord("c"),
    "show_fused": ord("o"),
    "show_mip": ord("m"),
    "liver_contrast": ord("l"),
    "brain_contrast": ord("b"),
    "contrast_up": ord("+"),
    "contrast_down": ord("-"),
    "next_slice": ord(">"),
    "prev_slice": ord("<"),
    "select_certain": ord("s"),
    "select_uncertain": ord("d"),
    "accept": ord("a"),
    "reject": ord("f"),
    "reject_adjacent": ord("F"),
    "grow_box": ord("r"),
    "shrink_box": ord("e"),
    "toggle_overlay": 9,
    "undo": ord("z"),
    "clear_rejections": ord("x"),  # platform extension, not in the legacy table
}
for _i in range(1, 10):
    KEY_ACTIONS[f"ct_preset_{_i}"] = ord(str(_i))

ACTION_FOR_CODE: Dict[int, str] = {code: action for action, code in KEY_ACTIONS.items()}

SELECT_ACTIONS = ("select_certain", "select_uncertain")
CLOSE_ACTIONS = ("accept", "reject")


def action_for(code: int) -> str | None:
    return ACTION_FOR_CODE.get(code)


def load_remap(path: Union[str, Path]) -> Dict[int, int]:
    """Load a {recorded code -> canonical code} table from a JSON file."""
    doc = json.loads(Path(path).read_text())
    return {int(k): int(v) for k, v in doc.items()}


def apply_remap(code: int, remap: Dict[int, int] | None) -> int:
    if remap is None:
        return code
    return remap.get(code, code)

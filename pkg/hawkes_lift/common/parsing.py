import json
from typing import Any, List, Union


def parse_list(val: Union[str, List, Any]) -> Union[List, Any]:
    """Decode a list-valued config entry.

    Accepts a JSON array (``[2, 3]``) or a comma-separated list (``2, 3``);
    numeric items are decoded, anything that is not a string passes through.

    Raises:
        ValueError: If an item of a comma list is empty.
    """
    if not isinstance(val, str):
        return val
    text = val.strip()
    if text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid list {text!r}: {exc}")
    items = [item.strip() for item in text.split(",")]
    if any(not item for item in items):
        raise ValueError(f"empty item in list {text!r}")
    return [parse_scalar(item) for item in items]


def parse_scalar(val: str) -> Union[int, float, bool, str, List]:
    """Decode a raw config value: JSON first, bare string otherwise."""
    text = val.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text

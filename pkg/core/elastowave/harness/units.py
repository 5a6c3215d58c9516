import re
from typing import Optional

# factor to SI for every accepted unit tag
UNITS = {
    "m": 1.0,
    "km": 1e3,
    "s": 1.0,
    "ms": 1e-3,
    "kg/m3": 1.0,
    "g/cm3": 1e3,
    "m/s": 1.0,
    "km/s": 1e3,
    "Pa": 1.0,
    "MPa": 1e6,
    "GPa": 1e9,
    "N*m": 1.0,
    "Nm": 1.0,
    "1/s": 1.0,
    "Hz": 1.0,
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z0-9/*]+)?\s*$")


class UnitError(ValueError):
    pass


def parse_quantity(text: str) -> Optional[float]:
    """'5 km' -> 5000.0; None when the text is not a number at all"""
    match = _QUANTITY.match(text)
    if not match:
        return None
    value, unit = match.groups()
    if unit is None:
        return float(value)
    if unit not in UNITS:
        raise UnitError(f"unknown unit '{unit}' (accepted: {', '.join(UNITS)})")
    return float(value) * UNITS[unit]

"""Built-in instrument modules and their bootstrap order."""
from __future__ import annotations

from .bobo import BoboInstrument
from .calendar import CalendarInstrument
from .diary import DiaryInstrument
from .health import HealthInstrument
from .parking import ParkingInstrument

# Bootstrap registration order; deterministic so context assembly is too.
BUILTIN_CLASSES = [
    BoboInstrument,
    HealthInstrument,
    CalendarInstrument,
    ParkingInstrument,
    DiaryInstrument,
]

BUILTIN_IDS = [cls.descriptor.toolkit_id for cls in BUILTIN_CLASSES]

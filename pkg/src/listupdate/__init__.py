"""List update with time windows and with delays: online algorithms,
brute-force offline optima and potential-function verification."""

from .instance import DELAYS, TIME_WINDOWS, DelayFunction, Instance, Request, make_instance, prize_collecting
from .lists import ListState, inversion_partition, inversions
from .trace import Action, ActionTrace, cost, serve_times

__version__ = "0.1.0"

from .symbols import SymbolGrid, constellation, generate_symbol_grid, resource_mask
from .precoding import Precoder, TransmitRecord, apply_precoder, beam_precoder
from .metrics import comm_metrics, safety_margins, slp_safety_margin

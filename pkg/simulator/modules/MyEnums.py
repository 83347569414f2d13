from enum import Enum


class Scheme(str, Enum):
    PROPOSED = "proposed"
    HEURISTIC = "heuristic"
    WITHOUT_IRS = "without_irs"
    RANDOM = "random"

class SweepAxis(str, Enum):
    NONE = "none"
    DISTANCE = "d"
    N_IRS = "n_irs"

class AoInit(str, Enum):
    IRS_PRINCIPAL = "irs_principal"
    IRS_ROW = "irs_row"
    DIRECT_MRT = "direct_mrt"

class CgStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    LINE_SEARCH_FAILED = "line_search_failed"

class Link(str, Enum):
    TI = "ti"
    TB = "tb"
    TE = "te"
    IB = "ib"
    IE = "ie"

# Fixed sub-stream offsets; adding Eve antennas must not perturb Bob's draws
LINK_STREAM_OFFSETS = {
    Link.TI: 0,
    Link.TB: 1,
    Link.TE: 2,
    Link.IB: 3,
    Link.IE: 4,
}
RANDOM_PHASES_STREAM_OFFSET = 5

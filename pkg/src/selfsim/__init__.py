"""Exact computations with self-similar groups and random walks on them."""

__version__ = "0.1.0"

from .automata import (  # noqa: F401
    Alphabet,
    Automaton,
    Element,
    ElementSet,
    activity,
    apply,
    classify_activity,
    compose,
    equal,
    identity,
    inverse,
    is_identity,
    level_permutation,
    minimize,
    section,
    state_set,
)
from .catalog import (  # noqa: F401
    GroupPresentation,
    adding_machine,
    basilica,
    grigorchuk,
    mother_group,
    parse_presentation,
    format_presentation,
)
from .measures import (  # noqa: F401
    Measure,
    convex_combine,
    convolution_power,
    convolve,
    delta,
    entropy,
    self_similar_decomposition,
    total_variation,
    translate,
    uniform,
)
from .weights import Weight, parse_weight  # noqa: F401

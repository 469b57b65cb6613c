'''
adaptivekg is a Python package for learning knowledge-graph embeddings
with translation models whose score is an adaptive, per-relation metric
over the absolute loss vector, and for evaluating them on the link
prediction and triple classification benchmarks.

You can also get documentation for all routines directly from
the interpreter using Python's built-in help() function.
For example:
>>> import adaptivekg as akg
>>> help(akg.score_transa)
'''

from .helper_functions import *
from .usefuls import *
from .kg_data import *
from .metric_core import *
from .model_file import *
from .config import *
from .training import *
from .evaluation import *
from .analysis import *
from .manifest import *
from .cli import main

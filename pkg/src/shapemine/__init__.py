"""Mine linear shape expressions from time series and match signals against them."""
from shapemine.abstraction import build_alphabet, choose_k, featurize, kmeans
from shapemine.kernels import BACKEND
from shapemine.learner import Dfa, build_pta, learn_dfa, rpni_merge
from shapemine.matcher import constrained_linefit, noisy_match, parse_lse
from shapemine.pipeline import MineConfig, MineReport, mine, mine_file
from shapemine.regexgen import Lse, attach_constraints, eliminate_states, render_lse, simplify
from shapemine.segmentation import Segmentation, segment_fixed_count, segment_min_count
from shapemine.signal import LineFit, PrefixSums, Signal, linefit, load_traces

__version__ = "0.1.0"

"""Fixing identification distance (FID) between acyclic directed mixed graphs.

Quick start::

    from fid import loads, fid, PairQuery

    g = loads("nodes: A B C\\nA -> B\\nB -> C")
    h = loads("nodes: A B C\\nA -> B\\nB -> C\\nA <-> C")
    fid(g, h).normalized
"""

from .distance import DistanceReport, MissPolicy, PairScore, fid, fid_symmetric, verify
from .expr import Density, Fraction, Integral, Product, parse, render
from .fixing import intrinsic_sets, is_fixable, reachable_sets, valid_fixing_sequences
from .graphs import Admg, Cadmg, Cpdag, DagWithLatents, GraphError, Mag, latent_project, m_separated
from .identify import EstimandSet, PairQuery, Status, identify_all, is_identifiable, y_star
from .io import ParseError, dumps, load, loads
from .mag import admg_to_mag, cpdag_fid_range, dag_extensions, markov_equiv_dags
from .perturb import EditType, GenConfig, apply_edit, apply_k_edits, gen_er_admg, shd
from .rewrite import canonicalize, expr_equal

__all__ = [
    "Admg", "Cadmg", "Cpdag", "DagWithLatents", "Density", "DistanceReport", "EditType",
    "EstimandSet", "Fraction", "GenConfig", "GraphError", "Integral", "Mag", "MissPolicy",
    "PairQuery", "PairScore", "ParseError", "Product", "Status", "admg_to_mag", "apply_edit",
    "apply_k_edits", "canonicalize", "cpdag_fid_range", "dag_extensions", "dumps", "expr_equal",
    "fid", "fid_symmetric", "gen_er_admg", "identify_all", "intrinsic_sets", "is_fixable",
    "is_identifiable", "latent_project", "load", "loads", "m_separated", "markov_equiv_dags",
    "parse", "reachable_sets", "render", "shd", "valid_fixing_sequences", "verify", "y_star",
]

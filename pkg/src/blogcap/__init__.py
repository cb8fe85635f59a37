"""Structural-capital analytics for directed blog recommendation networks."""

from .centrality import BACKEND, CentralityVector, Measure, PageRankParams
from .features import AttractivenessClass, BlogAttributes, DesignMatrix, Profession
from .graph import BlogNetwork, delineate_snowball, load_edge_list
from .mnlogit import InferenceRow, ModelFit

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AttractivenessClass",
    "BlogAttributes",
    "BlogNetwork",
    "CentralityVector",
    "DesignMatrix",
    "InferenceRow",
    "Measure",
    "ModelFit",
    "PageRankParams",
    "Profession",
    "delineate_snowball",
    "load_edge_list",
]

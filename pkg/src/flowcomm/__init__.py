"""Interactive multi-level exploration of streamline datasets.

Builds curve segment neighborhood graphs (CSNG) at segment / sub-curve /
streamline granularity, extracts flow communities with Louvain modularity
optimization, and exposes split/merge refinement, adjacency-matrix
inspection, a PCA k-means baseline, and evaluation metrics through a CLI
and an HTTP service.
"""

from .community import LouvainConfig, Partition, detect, louvain, modularity
from .graph import Csng, aggregate_to_streamlines, build_csng, graph_stats, symmetrize
from .model import (StreamlineSet, SubCurve, compute_attributes, decompose_subcurves,
                    filter_short, load_streamlines, resample_uniform)
from .neighbors import (NeighborQueryConfig, build_kdtree, curve_distance,
                        query_neighbors, segment_distance)

__version__ = "0.1.0"

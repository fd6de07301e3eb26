"""codescope: an explorable code-graph workbench for Java projects.

Builds a typed, multi-level code graph from source, enriches it with
version-control history (heat, co-change, release windows), and serves
validated, declarative view specifications to an interactive client.
"""

__version__ = "0.1.0"

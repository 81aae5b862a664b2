"""Wedderburn decompositions of rational group algebras of finite metabelian
groups via strong Shoda pairs, with the Kleinian-type decision layer."""

__version__ = "0.1.0"

from .groups import (  # noqa: F401
    FiniteGroup,
    Subgroup,
    all_subgroups,
    center,
    core,
    derived_subgroup,
    direct_product,
    epimorphism_exists,
    from_permutations,
    normalizer,
    quotient,
    rational_class_count,
)
from .catalog import catalog_group, group_from_spec, three_part_semidirect  # noqa: F401

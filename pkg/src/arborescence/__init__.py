"""Discrete Morse matchings, collapse certificates and nonpositive-curvature checks
for finite cube and simplicial complexes.

Submodules:

* :mod:`~arborescence.complex` – faces, complexes, links, derived subdivisions
* :mod:`~arborescence.geometry` – distance functions, star minima, geodesics
* :mod:`~arborescence.morse` – gradient matchings from star-minimal functions
* :mod:`~arborescence.certificate` – replayable collapse certificates
* :mod:`~arborescence.collapse` – greedy/exhaustive search, constructive collapses, filtrations
* :mod:`~arborescence.catzero` – flag-link and simple-connectivity checks
* :mod:`~arborescence.scheduler` – collapse schedules for barycentric subdivisions
* :mod:`~arborescence.generators` – test complexes
* :mod:`~arborescence.cli` – command-line front end
"""
from .certificate import (CertificateError, CollapseCertificate, Verdict, __version__, certify,
                          read_certificate, verify_certificate, write_certificate)
from .complex import (CUBE, SIMPLEX, Complex, ComplexError, Face, Subcomplex, build_complex,
                      derived_neighborhood, derived_subdivision, free_faces, link, read_complex,
                      write_complex)
from .geometry import (DistanceFunction, MetricEvaluator, UniquenessViolation, VertexFunction,
                       generic_distance, geodesic_distance, star_min)
from .morse import (Matching, build_gradient_matching, check_acyclic, critical_cells,
                    matching_to_collapse)
from .collapse import (exhaustive_collapsibility, greedy_collapse, grid_filtration,
                       polytopal_gradient_collapse, sublevel_filtration)
from .catzero import cat0_cube_check, flag_link_check, simple_connectivity
from .scheduler import derived_order, m_set, sd_collapse_schedule

__all__ = [
    "__version__", "CUBE", "SIMPLEX", "Face", "Complex", "Subcomplex", "ComplexError",
    "build_complex", "link", "derived_subdivision", "derived_neighborhood", "free_faces",
    "read_complex", "write_complex",
    "MetricEvaluator", "DistanceFunction", "VertexFunction", "UniquenessViolation",
    "generic_distance", "geodesic_distance", "star_min",
    "Matching", "build_gradient_matching", "critical_cells", "check_acyclic",
    "matching_to_collapse",
    "CollapseCertificate", "CertificateError", "Verdict", "certify", "verify_certificate",
    "read_certificate", "write_certificate",
    "greedy_collapse", "exhaustive_collapsibility", "polytopal_gradient_collapse",
    "sublevel_filtration", "grid_filtration",
    "cat0_cube_check", "flag_link_check", "simple_connectivity",
    "derived_order", "m_set", "sd_collapse_schedule",
]

"""Quantum permutation correlations and certificates for their locality."""
from .correlation import (CharacteristicMatrix, Correlation, compose, deterministic, from_characteristic,
                          is_group_invariant, is_valid, swap_io, to_characteristic,
                          uniform_group_correlation, validate)
from .cyclotomic import Cyclotomic, Sign, abs_squared, format_exact, golden_ratio, real_sign, sqrt5
from .errors import (BoundExceeded, IndexMismatch, NlsymError, NotAutomorphism, NotB4,
                     NotConnectedRegular, NotDisjoint, NotDoublyStochastic, NotInvariant,
                     NotMagicUnitary, ParseError, PrecisionExhausted)
from .games import (Classification, Criterion, Product, Verdict, classify, disjoint_auto_correlation,
                    find_disjoint_automorphisms, lift_correlation_to_product, run_corpus,
                    spectral_product_check, winning_violations)
from .graphs import Graph, automorphisms, is_isomorphic, named, parse_edge_list, parse_graph6
from .groups import AbelianGroup, DualPermutation, GroupAutomorphism, automorphism_group
from .k4 import k4_decide, k4_inequalities, recover_decomposition_k4, transposition_graph
from .locality import (Certificate, CertificateFailure, InvariantCertificate, LocalityVerdict, Status,
                       decide_local, decide_local_invariant)
from .qls import (QuantumLatinSquare, SurveyReport, build_qls, characteristic_matrix, is_classical_qls,
                  orbit_representatives, qls_correlation, survey)

__version__ = "0.1.0"

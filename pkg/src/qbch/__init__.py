"""Quantum BCH code toolkit.

Builds quantum BCH codes from classical BCH codes, assembles
symmetry-optimized entanglement-distillation protocols for logical
ancilla preparation, verifies strict fault tolerance by exhaustive
fault-pattern analysis, and evaluates performance with Pauli-frame
Monte Carlo and closed-form threshold analytics.
"""

from qbch.gf2poly import BitPoly, FieldSpec, CyclotomicCoset, bch_generator, cyclotomic_cosets, minimal_polynomial
from qbch.gf2mat import GF2Matrix
from qbch.codes import CyclicCode, CssCode, WeightEnumerator
from qbch.symmetry import AutomorphismElement
from qbch.circuit import Circuit, PauliFrame, FaultLocation
from qbch.distill import DistillationProtocol, AssembledCircuit
from qbch.verifier import Verdict, FaultEffect
from qbch.simulate import NoiseModel, TrialBatch

__version__ = "0.1.0"

__all__ = [
    "BitPoly",
    "FieldSpec",
    "CyclotomicCoset",
    "bch_generator",
    "cyclotomic_cosets",
    "minimal_polynomial",
    "GF2Matrix",
    "CyclicCode",
    "CssCode",
    "WeightEnumerator",
    "AutomorphismElement",
    "Circuit",
    "PauliFrame",
    "FaultLocation",
    "DistillationProtocol",
    "AssembledCircuit",
    "Verdict",
    "FaultEffect",
    "NoiseModel",
    "TrialBatch",
    "__version__",
]

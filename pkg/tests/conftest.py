"""Shared fixtures: ill-formed hybrid programs with their expected verdicts."""

from hybridsim.models import (
    COHERENT_CLASSICAL_CALL,
    DEPTH_EXCEEDED,
    MALFORMED,
    MISSING_FLAG,
    PARTIAL_MEASURE,
    REGISTER_OVERLAP,
    TRAILING_UNITARY,
    ClassicalStage,
    FlaggedOracleStage,
    H,
    HybridProgram,
    OracleEnv,
    OracleStage,
    QCRound,
    QuantumRound,
    UnitaryStage,
)
from hybridsim.oracles import OracleBundle, Slot, identity_table

LAYOUT = {"X": 3, "R": 4, "S": 3, "T": 4}


def fixture_env() -> OracleEnv:
    return OracleEnv(bundle=OracleBundle([identity_table(3)], label="identity"))


def malformed_program_fixtures():
    """(name, program, expected violation kind) triples.

    Each program is broken in exactly one deliberate way; incidental
    secondary violations are fine as long as the expected kind is reported.
    """
    u = UnitaryStage((H("X"),))
    slot = Slot.of(0, "X", "R")
    scratch = Slot.of(0, "S", "T")
    fixtures = []

    fixtures.append((
        "classical-processing-inside-a-coherent-round",
        HybridProgram("cq", 1, LAYOUT, (
            QuantumRound(stages=(u, ClassicalStage(lambda ctx: None), OracleStage((slot,)))),
        )),
        COHERENT_CLASSICAL_CALL,
    ))
    fixtures.append((
        "persistent-round-with-no-query",
        HybridProgram("qc", 2, LAYOUT, (
            QCRound(unitary=u, oracle=None, measure=("X",)),
        )),
        TRAILING_UNITARY,
    ))
    fixtures.append((
        "round-ends-in-a-partial-measurement",
        HybridProgram("cq", 1, LAYOUT, (
            QuantumRound(stages=(u, OracleStage((slot,))), measure=("X",)),
        )),
        PARTIAL_MEASURE,
    ))
    fixtures.append((
        "more-query-stages-than-declared-depth",
        HybridProgram("qnc", 1, LAYOUT, (
            QuantumRound(stages=(u, OracleStage((slot,)), OracleStage((scratch,)))),
        )),
        DEPTH_EXCEEDED,
    ))
    fixtures.append((
        "parallel-slots-share-a-register",
        HybridProgram("qnc", 1, LAYOUT, (
            QuantumRound(stages=(u, OracleStage((slot, Slot.of(0, "X", "T"))))),
        )),
        REGISTER_OVERLAP,
    ))
    fixtures.append((
        "flag-qubit-not-in-the-layout",
        HybridProgram("qnc", 1, LAYOUT, (
            QuantumRound(stages=(u, FlaggedOracleStage((slot,), flag="F"))),
        )),
        MISSING_FLAG,
    ))
    fixtures.append((
        "adjacent-unitary-stages",
        HybridProgram("qnc", 1, LAYOUT, (
            QuantumRound(stages=(u, UnitaryStage((H("S"),)), OracleStage((slot,)))),
        )),
        MALFORMED,
    ))
    return fixtures

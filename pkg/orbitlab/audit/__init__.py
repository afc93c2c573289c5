# flake8: noqa
from .reports import AuditReport, AuditVerdict, NoWitness
from .auditors import (
    D1, D2, I1, I2, UC, audit_d1, audit_d2, audit_i1, audit_i2, audit_uc, largest_reversal, traceless_directions,
    uc_ratio, wide_range_elements,
)

"""Privacy-preserving publishing of process-mining event logs."""

from .anonymizers import (
    CipherSpec,
    ClusterSpec,
    PipelineError,
    PipelineStep,
    SeededRng,
    SubstitutionSpec,
    add_trailing_event,
    apply_pipeline,
    condense_case_attribute,
    encrypt_activity,
    generalize_time,
    substitute_activities,
    suppress_cases_by_trace_length,
    suppress_events_by_activity,
    suppress_resource_by_activity,
    swap_case_attribute,
)
from .ela import ElaDocument, dfg_abstraction, read_ela, write_ela
from .leakage import LeakageQuery, enumerate_ol, estimate_ol_cardinality, po_check
from .log import Case, Event, EventLog, build_log, project_trace, validate
from .metadata import (
    AnonymizationRecord,
    get_anonymizations,
    get_anonymizer,
    set_anonymizer,
    set_optional_anonymizer,
)
from .signature import AnonymizerSignature
from .xes import XesDocument, parse_xes, serialize_xes

__version__ = "0.1.0"

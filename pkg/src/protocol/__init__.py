"""BB84 phase-coding protocol: sessions, sifting, estimation, monitoring, OTP demo."""

from .bb84 import (
    CSV_COLUMNS,
    MAX_TRANSCRIPT_PULSES,
    Basis,
    BasisAnnouncement,
    CountSummary,
    PulseRecord,
    SessionTranscript,
    Symbol,
    WorkingPoint,
    alice_phase,
    bob_phase,
    count_session,
    expected_click_rate,
    run_session,
)
from .otp import KeyPad, otp_decrypt, otp_encrypt
from .sifting import (
    DEFAULT_QBER_LIMIT,
    DEFAULT_SAMPLE_FRACTION,
    SampleDisclosure,
    SiftedKey,
    estimate_and_gate,
    key_bytes,
    raw_key_hex,
    sift,
)
from .trojan import (
    TrojanMonitor,
    alarm_probability,
    default_threshold,
    sample_monitor_window,
    trojan_check,
)

__all__ = [
    "CSV_COLUMNS",
    "DEFAULT_QBER_LIMIT",
    "DEFAULT_SAMPLE_FRACTION",
    "MAX_TRANSCRIPT_PULSES",
    "Basis",
    "BasisAnnouncement",
    "CountSummary",
    "KeyPad",
    "PulseRecord",
    "SampleDisclosure",
    "SessionTranscript",
    "SiftedKey",
    "Symbol",
    "TrojanMonitor",
    "WorkingPoint",
    "alarm_probability",
    "alice_phase",
    "bob_phase",
    "count_session",
    "default_threshold",
    "estimate_and_gate",
    "expected_click_rate",
    "key_bytes",
    "otp_decrypt",
    "otp_encrypt",
    "raw_key_hex",
    "run_session",
    "sample_monitor_window",
    "sift",
    "trojan_check",
]

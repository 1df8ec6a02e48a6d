from .suite import Verifier, InvariantRecord, VerifyReport, VerifySummary

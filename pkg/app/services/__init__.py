from app.services.entanglement_svc import EntanglementService
from app.services.family_svc import FamilyService
from app.services.optimizer_svc import OptimizerService
from app.services.protocol_svc import ProtocolService
from app.services.unitary_svc import UnitaryService

__all__ = [
    "EntanglementService",
    "FamilyService",
    "OptimizerService",
    "ProtocolService",
    "UnitaryService",
]

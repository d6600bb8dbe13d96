from __future__ import annotations

from functools import lru_cache

from app.core.config import Settings
from app.services.entanglement_svc import EntanglementService
from app.services.family_svc import FamilyService
from app.services.optimizer_svc import OptimizerService
from app.services.protocol_svc import ProtocolService
from app.services.unitary_svc import UnitaryService


@lru_cache(maxsize=4)
def get_unitary_service(settings: Settings) -> UnitaryService:
    return UnitaryService(settings)


@lru_cache(maxsize=4)
def get_entanglement_service(settings: Settings) -> EntanglementService:
    return EntanglementService(settings)


@lru_cache(maxsize=4)
def get_protocol_service(settings: Settings) -> ProtocolService:
    return ProtocolService(
        entanglement_service=get_entanglement_service(settings),
        unitary_service=get_unitary_service(settings),
        settings=settings,
    )


@lru_cache(maxsize=4)
def get_family_service(settings: Settings) -> FamilyService:
    return FamilyService(
        protocol_service=get_protocol_service(settings),
        entanglement_service=get_entanglement_service(settings),
        unitary_service=get_unitary_service(settings),
        settings=settings,
    )


@lru_cache(maxsize=4)
def get_optimizer_service(settings: Settings) -> OptimizerService:
    return OptimizerService(
        protocol_service=get_protocol_service(settings),
        unitary_service=get_unitary_service(settings),
        settings=settings,
    )

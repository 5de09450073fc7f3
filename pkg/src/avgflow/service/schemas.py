"""Request and response bodies for the experiment service."""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field

from ..experiments import ExperimentConfig


class RunRequest(BaseModel):
    config: ExperimentConfig
    jobs: int = Field(default=1, ge=1, le=32)


class ArtifactBody(BaseModel):
    """One output file: a relative name plus its full text."""

    name: str
    text: str


class PointSummary(BaseModel):
    label: str
    alpha: Optional[float]
    suite: str
    passed: bool


class RunResponse(BaseModel):
    points: List[PointSummary]
    artifacts: List[ArtifactBody]


class VerifyRequest(BaseModel):
    suites: Optional[List[str]] = None
    jobs: int = Field(default=1, ge=1, le=32)


class VerifyRow(BaseModel):
    suite: str
    label: str
    passed: bool
    failed: List[str]
    notes: int


class VerifyResponse(BaseModel):
    rows: List[VerifyRow]
    all_passed: bool
    table: str


class CatalogEntry(BaseModel):
    name: str
    tag: str


class CatalogResponse(BaseModel):
    dynamics: List[CatalogEntry]
    algorithms: List[CatalogEntry]
    problems: List[CatalogEntry]
    suites: List[CatalogEntry]


class HealthResponse(BaseModel):
    status: str
    version: str

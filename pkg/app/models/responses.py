"""
Response models for the API.
"""

from pydantic import BaseModel, Field

from .numerics import StudyReport
from .requests import Study


class StudyResponse(BaseModel):
    """Response model for a study run"""

    success: bool = Field(description="Whether the study completed", examples=[True])
    study: Study = Field(description="The study that was run", examples=["tauberian"])
    reports: list[StudyReport] = Field(default_factory=list, description="Tables produced by the study")
    diagnostics: dict[str, float | int | str | bool] = Field(default_factory=dict)
    error_message: str | None = Field(None, description="Error message if the study failed")
    processing_time: float | None = Field(
        None, description="Wall time of the study in seconds", examples=[2.34]
    )


class ErrorResponse(BaseModel):
    """Error response model"""

    detail: str = Field(..., description="Error description")
    error_code: str | None = Field(None, description="Specific error code")

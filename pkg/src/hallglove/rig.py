"""Bundle of everything needed to simulate one glove on one hand."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .hand import AnthropometricProfile, RomTable
from .mlp import NormalizationSpec, default_normalization
from .physics import AdcModel, GloveLayout, HallSensorModel, ImuModel, default_layout


@dataclass(frozen=True)
class GloveModels:
    layout: GloveLayout = field(default_factory=default_layout)
    hall: HallSensorModel = field(default_factory=HallSensorModel)
    adc: AdcModel = field(default_factory=AdcModel)
    imu: ImuModel = field(default_factory=ImuModel)
    rom: RomTable = field(default_factory=RomTable)
    profile: Optional[AnthropometricProfile] = None  # None = 50th percentile mounts

    def normalization(self) -> NormalizationSpec:
        return default_normalization(self.adc, self.imu)

    def with_profile(self, profile: Optional[AnthropometricProfile]) -> "GloveModels":
        return replace(self, profile=profile)

    def without_noise(self) -> "GloveModels":
        return replace(
            self,
            hall=replace(self.hall, noise_sigma=0.0),
            imu=replace(self.imu, accel_noise_sigma=0.0, gyro_noise_sigma=0.0),
        )

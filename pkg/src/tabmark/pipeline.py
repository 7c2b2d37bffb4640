"""End-to-end encoding: rank, select, optimize, embed, validate, build the key."""

from __future__ import annotations

from dataclasses import dataclass, field

from .codec import (CreationResult, Watermark, create_watermark_params, embed,
                    generate_bits)
from .decoder import default_correction
from .keyfile import WatermarkKey
from .pso import SwarmConfig
from .ranking import (BinningSpec, CandidateSet, CpVector,
                      classification_potential, median_cp, select_candidates)
from .store import ConstraintReport, Dataset, UsabilityConstraints, validate_constraints


@dataclass
class EncodeOptions:
    length: int = 16
    bits: str | None = None            # explicit bit string overrides length
    seed: int = 0
    top_exclude: int = 1
    cp_threshold: float | None = None  # None: median classification potential
    bin_count: int = 10
    constraints: UsabilityConstraints = field(default_factory=UsabilityConstraints)
    swarm: SwarmConfig | None = None   # None: defaults with the pipeline seed
    correction: float | None = None    # None: per-feature default policy

    def swarm_config(self) -> SwarmConfig:
        return self.swarm if self.swarm is not None else SwarmConfig(seed=self.seed)


@dataclass(frozen=True)
class EncodeResult:
    feasible: bool
    creation: CreationResult
    candidates: CandidateSet
    watermark: Watermark
    bins: BinningSpec
    cp_before: CpVector
    marked: Dataset | None = None
    key: WatermarkKey | None = None
    cp_after: CpVector | None = None
    constraint_report: ConstraintReport | None = None


def encode(dataset: Dataset, options: EncodeOptions | None = None,
           embed_stage: bool = True) -> EncodeResult:
    """Run the encoding pipeline on an in-memory dataset.

    With ``embed_stage=False`` the pipeline stops after parameter creation
    (the ``create`` subcommand). When the optimizer cannot reach a feasible
    point the result carries the best attempt and no marked dataset is
    produced.
    """
    options = options or EncodeOptions()
    bins = BinningSpec.equal_width(dataset, options.bin_count)
    cp_before = classification_potential(dataset, bins)
    threshold = (options.cp_threshold if options.cp_threshold is not None
                 else median_cp(cp_before))
    candidates = select_candidates(cp_before, options.top_exclude, threshold)

    if options.bits is not None:
        watermark = Watermark.from_string(options.bits)
    else:
        watermark = generate_bits(options.length, options.seed)

    creation = create_watermark_params(
        dataset, candidates, options.constraints, options.swarm_config(),
        bins, watermark)
    if not creation.feasible or not embed_stage:
        return EncodeResult(creation.feasible, creation, candidates, watermark,
                            bins, cp_before)

    marked, delta = embed(dataset, watermark, creation.rates, candidates,
                          options.constraints)
    correction = {}
    for feature in candidates.features:
        if options.correction is not None:
            correction[feature] = options.correction
        else:
            correction[feature] = default_correction(
                creation.rates[feature], float(dataset.column(feature).max()))
    key = WatermarkKey(
        features=candidates.features,
        rates=dict(creation.rates),
        bounds=dict(creation.bounds),
        bits=watermark.bits,
        correction=correction,
        bins=bins,
        delta=delta,
        id_column=dataset.id_column,
        class_column=dataset.class_column,
    )
    cp_after = classification_potential(marked, bins)
    report = validate_constraints(dataset, marked, options.constraints,
                                  cp_before, cp_after)
    return EncodeResult(True, creation, candidates, watermark, bins, cp_before,
                        marked, key, cp_after, report)

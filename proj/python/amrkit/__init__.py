# Copyright 2026 The amrkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Meter-reading toolkit: annotation parsing, detection/recognition decoding and evaluation."""

from ._amr import (  # noqa: F401
    AmrError,
    Anchor,
    Box,
    DecodedBox,
    MeterAnnotation,
    PipelineTrace,
    ReadingResult,
    TTest,
    all_permutations,
    decode_ctc_greedy,
    decode_grid,
    decode_multitask,
    eval_detection,
    eval_recognition,
    expand_margin,
    filter_count,
    iou,
    kmeans_anchors,
    make_synthetic_meters,
    nms,
    paired_t_test,
    parse_annotation,
    plan_counts,
    read_tensor,
    resolve_transition_digit,
    run_oracle,
    select_counter,
    serialize_annotation,
    split_dataset,
    split_sizes,
    write_tensor,
)

__all__ = [name for name in dir() if not name.startswith("_")]

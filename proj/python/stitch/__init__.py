# Copyright 2026 The Stitch Authors
# SPDX-License-Identifier: Apache-2.0
"""Python bindings for the stitch layout, cutout and evaluation core."""

import json

from ._stitch import (
    StitchError,
    __version__,
    center_relation_holds,
    iou_iot,
    run_cli,
    select_mask,
    smooth_mask,
)
from . import _stitch

__all__ = [
    "StitchError",
    "__version__",
    "center_relation_holds",
    "fallback_plan",
    "gen_prompts",
    "iou_iot",
    "run_cli",
    "select_mask",
    "smooth_mask",
]


def fallback_plan(prompt, canvas=32):
    """Grid-solver layout for a prompt, as the layout file's JSON object."""
    return json.loads(_stitch.fallback_plan_json(prompt, canvas))


def gen_prompts(task, n, seed):
    """PosEval prompt records, one dict per JSONL line."""
    return [json.loads(line) for line in _stitch.gen_prompts_jsonl(task, n, seed)]

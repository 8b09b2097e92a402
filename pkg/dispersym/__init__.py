# Copyright 2024-2025 dispersym developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# libraries
from dispersym import common
from dispersym.common import (DispersymError, Family, Formats, Integrator, Mode)
from dispersym.polynomial import (Atom, GaussianRational, I, Polynomial, canonicalize_complex,
                                  coeff, conj, conjugate, differentiate, im, param,
                                  poly_arith, re_, support_band)
from dispersym.symbols import (DiffOperator, OpaqueAtom, OpaqueRegistry, RayOperator,
                               SymbolExpr, adjoint, bell_table, compose, declare_opaque,
                               exp_conjugate, sobolev_conjugate, symbol_order, truncate)
from dispersym.recursion import (MAX_K, ConditionEntry, ConditionSet, RecursionState,
                                 base_case, check_structure, iterate, necessary_conditions,
                                 raw_integrands, recursion_step, lettered_conditions,
                                 verify_structure)
from dispersym.gauge import (GaugeResult, corollary_conditions, corollary_operator,
                             gauge_conjugate, mod_derivatives)
from dispersym.identities import (StageSpec, build_stage, certify_stage, selfadjoint_case,
                                  stage_cases, verify_all, verify_identity,
                                  verify_selfadjoint_reduction)
from dispersym.conditions import (ConditionReport, HoelderReport, SampledFunction,
                                  TaramaReport, bump, check_conditions, condition_set,
                                  hoelder_ratio, plateau, tarama_symbol_numeric)
from dispersym.spectral import (ProbeResult, SimConfig, SimResult, WavepacketSpec,
                                duality_probe, evolve, frequency_sweep, multiplier_oracle,
                                packet_phase, wavepacket)
from dispersym.util import CoeffExpr, parse_coeff_expr
from .__about__ import (__author__, __copyright__, __description__,
                        __license__, __title__, __version__)



__all__ = [
    '__author__',
    '__copyright__',
    '__description__',
    '__license__',
    '__title__',
    '__version__',
    'Atom',
    'CoeffExpr',
    'ConditionEntry',
    'ConditionReport',
    'ConditionSet',
    'DiffOperator',
    'DispersymError',
    'Family',
    'Formats',
    'GaugeResult',
    'GaussianRational',
    'HoelderReport',
    'I',
    'Integrator',
    'MAX_K',
    'Mode',
    'OpaqueAtom',
    'OpaqueRegistry',
    'Polynomial',
    'ProbeResult',
    'RayOperator',
    'RecursionState',
    'SampledFunction',
    'SimConfig',
    'SimResult',
    'StageSpec',
    'SymbolExpr',
    'TaramaReport',
    'WavepacketSpec',
    'adjoint',
    'base_case',
    'bell_table',
    'build_stage',
    'bump',
    'canonicalize_complex',
    'certify_stage',
    'check_conditions',
    'check_structure',
    'coeff',
    'common',
    'compose',
    'condition_set',
    'conj',
    'conjugate',
    'corollary_conditions',
    'corollary_operator',
    'declare_opaque',
    'differentiate',
    'duality_probe',
    'evolve',
    'exp_conjugate',
    'frequency_sweep',
    'gauge_conjugate',
    'hoelder_ratio',
    'im',
    'iterate',
    'mod_derivatives',
    'multiplier_oracle',
    'necessary_conditions',
    'packet_phase',
    'param',
    'parse_coeff_expr',
    'plateau',
    'poly_arith',
    'raw_integrands',
    're_',
    'recursion_step',
    'selfadjoint_case',
    'sobolev_conjugate',
    'stage_cases',
    'support_band',
    'symbol_order',
    'tarama_symbol_numeric',
    'lettered_conditions',
    'truncate',
    'verify_all',
    'verify_identity',
    'verify_selfadjoint_reduction',
    'verify_structure',
    'wavepacket'
]

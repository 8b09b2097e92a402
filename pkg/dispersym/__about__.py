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

__title__ = 'dispersym'
__description__ = 'Symbol calculus and spectral lab for variable-coefficient dispersive operators'
__version__ = '0.3.0'
__author__ = 'dispersym developers'
__author_email__ = 'dispersym-dev@users.noreply.github.com'
__license__ = 'Apache 2.0'
__copyright__ = 'Copyright 2024-2025 dispersym developers'

# Copyright 2024 Canonical Ltd.
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

import json
import logging
import subprocess
import sys
from pathlib import Path
from typing import List, Optional

logger = logging.getLogger(__name__)

CLI = Path(__file__).resolve().parents[2] / "src" / "cli.py"


def satlab(*args: str, stdin: Optional[str] = None) -> subprocess.CompletedProcess:
    """Run the satlab command line in a fresh interpreter."""
    cmd = [sys.executable, str(CLI), *args]
    logger.info(f"Running {' '.join(args)}")
    return subprocess.run(cmd, input=stdin, capture_output=True, text=True, timeout=600)


def json_lines(stdout: str) -> List[dict]:
    return [json.loads(line) for line in stdout.splitlines() if line.strip()]

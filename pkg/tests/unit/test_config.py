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

import os
import tempfile
import textwrap
import unittest
from unittest import mock

import config


class TestSettings(unittest.TestCase):
    def setUp(self):
        config.reset()
        self.addCleanup(config.reset)
        env = mock.patch.dict(os.environ, {}, clear=False)
        env.start()
        self.addCleanup(env.stop)
        os.environ.pop(config.CONFIG_ENV, None)
        os.environ.pop(config.THREADS_ENV, None)

    def _write_config(self, text: str) -> str:
        handle = tempfile.NamedTemporaryFile("w", suffix=".yaml", delete=False)
        self.addCleanup(os.unlink, handle.name)
        with handle:
            handle.write(textwrap.dedent(text))
        return handle.name

    def test_bundled_defaults(self):
        self.assertEqual(config.get_settings(), config.Settings())

    def test_custom_file(self):
        path = self._write_config(
            """
            options:
              restarts:
                default: 5
                type: int
              tolerance:
                default: 1.0e-6
                type: float
              bogus:
                default: 1
            """
        )
        with self.assertLogs("config", level="WARNING") as logs:
            settings = config.get_settings(path)
        self.assertEqual(settings.restarts, 5)
        self.assertEqual(settings.tolerance, 1e-6)
        self.assertEqual(settings.exact_limit, 24)
        self.assertIn("bogus", logs.output[0])

    def test_missing_file_uses_defaults(self):
        self.assertEqual(config.get_settings("/nonexistent/satlab.yaml"), config.Settings())

    def test_environment(self):
        path = self._write_config("options:\n  seed:\n    default: 9\n")
        with mock.patch.dict(os.environ, {config.CONFIG_ENV: path, config.THREADS_ENV: "3"}):
            settings = config.get_settings()
        self.assertEqual(settings.seed, 9)
        self.assertEqual(settings.threads, 3)

    def test_rejects_bad_thread_count(self):
        with mock.patch.dict(os.environ, {config.THREADS_ENV: "0"}):
            with self.assertRaises(ValueError):
                config.get_settings()

    def test_override(self):
        path = self._write_config("options:\n  max-iters:\n    default: 7\n")
        settings = config.override(path=path, threads=2)
        self.assertEqual(settings.max_iters, 7)
        self.assertEqual(settings.threads, 2)
        self.assertEqual(config.get_settings().max_iters, 7)

    def test_override_leaves_environment_alone(self):
        path = self._write_config("options:\n  max-iters:\n    default: 7\n")
        config.override(path=path, threads=2)
        self.assertNotIn(config.CONFIG_ENV, os.environ)
        self.assertNotIn(config.THREADS_ENV, os.environ)
        config.reset()
        self.assertEqual(config.get_settings(), config.Settings())

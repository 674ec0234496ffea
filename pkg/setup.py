#!/usr/bin/env python

from setuptools import setup
import subprocess

# This is fine as long as that imports nothing else.
from secure_relay_kit import __version__

install_requires = [
    "msgpack",
    "numpy >=1.17",
    "scipy >=1.4",
]

scripts = []

try:
    local_version = '+git.{}'.format(
        subprocess.check_output('git rev-parse HEAD', shell=True, encoding='utf8').strip())
except Exception:
    local_version = ''

setup(name='secure_relay_kit',
      version=__version__ + local_version,
      description='resource allocation for relay-assisted secure OFDMA with untrusted users',
      packages=['secure_relay_kit',
                'secure_relay_kit.mains',
                'secure_relay_kit.util',
                ],
      package_dir={'secure_relay_kit': 'secure_relay_kit/'},
      entry_points={'console_scripts': [
          'secure-ra=secure_relay_kit.mains.secure_ra:main',
      ],
      },
      extras_require={
          'test': ['pytest', 'pytest-mock', 'pytest-cov'],
      },
      scripts=scripts,
      zip_safe=False,
      install_requires=install_requires,
)

"""A setup tools based setup module.
"""

import setuptools


_ABOUT = {}

exec(open('recondg/__about__.py').read(), _ABOUT)


setuptools.setup(
    name=_ABOUT['APP_NAME'],
    version=_ABOUT['VERSION'],
    description=_ABOUT['DESCRIPTION'],
    long_description=_ABOUT['LONG_DESCRIPTION'],
    author=_ABOUT['AUTHOR'],
    author_email=_ABOUT['AUTHOR_EMAIL'],
    license=_ABOUT['LICENSE'],
    keywords=_ABOUT['KEYWORDS'],

    classifiers=[
        # https://pypi.python.org/pypi?%3Aaction=list_classifiers
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
    ],

    python_requires='>=3.8',

    packages=[
        'recondg',
    ],

    install_requires=[
        'numpy (>=1.20)',
        'scipy (>=1.8)',
        'matplotlib (>=3.3)',
    ],

    extras_require={
        'test': ['pytest (>=6.0)'],
    },

    entry_points={
        'console_scripts': [
            'recondg=recondg.recondg:main',
        ],
    },
)

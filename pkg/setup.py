'''
Setup script
'''

from setuptools import setup


setup(name='adaptivekg',
      version='0.1.0',
      description='Knowledge-graph embeddings with adaptive per-relation metrics',
      package_dir = {'adaptivekg' : 'akg'},
      packages=['adaptivekg'],
      python_requires='>=3.7',
      install_requires=['numpy','scipy','scikit-learn','tqdm','joblib'],
      extras_require={'test': ['pytest']},
      entry_points={'console_scripts': ['akg = adaptivekg.cli:main']},
)

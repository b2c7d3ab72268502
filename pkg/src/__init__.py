"""homquot: 有限次元代数上の相対ホモロジー不変量の計算ワークベンチ"""

__version__ = "0.1.0"

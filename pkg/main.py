#!/usr/bin/env python3
"""
homquot: 相対ホモロジー不変量の計算ワークベンチ
レジストリ（JSON）の検証、不変量の計算、性質スイートの実行を行います

終了コード: 0 成功（すべて一致）/ 1 計算失敗または不一致 / 2 入力不正
"""

import argparse
import logging
import sys
from typing import List, Optional

from src import __version__
from src.config import WorkbenchConfig
from src.errors import HomquotError, InvalidRegistryError
from src.report import ReportGenerator
from src.workbench import COMPUTATION_ERRORS, KINDS, SUITES, Workbench


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--p', type=int, default=None, help='素数 p（ファイルの field.p より優先）')
    common.add_argument('--x', dest='x_label', default=None,
                        help='X として使う部分圏名またはカンマ区切りの対象名')
    common.add_argument('--n-max', dest='n_max', type=int, default=None, help='スイートで調べる最大次数')
    common.add_argument('--mode', dest='approximation_mode', choices=['pruned', 'universal'], default=None,
                        help='分解に使う近似の種類')
    common.add_argument('--tor-resolve', dest='tor_resolve', choices=['right', 'left'], default=None,
                        help='Tor で分解する側')
    common.add_argument('--workers', type=int, default=None, help='スイートの並行数')
    common.add_argument('--no-stability-check', dest='stability_check', action='store_const', const=False,
                        default=None, help='長さを伸ばした再計算による安定性確認を省く')
    common.add_argument('--representatives', dest='include_representatives', action='store_const', const=True,
                        default=None, help='代表元の基底も出力する')
    common.add_argument('--no-timing', dest='include_timing', action='store_const', const=False, default=None,
                        help='計測時間を出力しない（出力が実行ごとに同一になる）')
    common.add_argument('--pretty', action='store_const', const=True, default=None, help='表形式で出力する')
    common.add_argument('--verbose', '-v', action='store_true', help='デバッグログを標準エラーに出力する')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog='homquot',
        description='有限次元代数上の相対拡大群・Tor・安定Hom・Verdier商Homの計算と照合'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p_validate = sub.add_parser('validate', parents=[common], help='レジストリを検証する')
    p_validate.add_argument('registry', help='レジストリファイル（付属レジストリ名も可）')

    p_compute = sub.add_parser('compute', parents=[common], help='不変量を一つ計算する')
    p_compute.add_argument('kind', choices=KINDS)
    p_compute.add_argument('a', metavar='A')
    p_compute.add_argument('b', metavar='B')
    p_compute.add_argument('n', type=int)
    p_compute.add_argument('-r', '--registry', required=True, help='レジストリファイル（付属レジストリ名も可）')
    p_compute.add_argument('--cross-check', action='store_true', help='利用できる全経路で計算して一致を確認する')

    p_suite = sub.add_parser('suite', parents=[common], help='性質スイートを実行する')
    p_suite.add_argument('name', choices=SUITES)
    p_suite.add_argument('-r', '--registry', required=True, help='レジストリファイル（付属レジストリ名も可）')
    return parser


def _flags(args: argparse.Namespace) -> dict:
    keys = (
        'p', 'n_max', 'approximation_mode', 'tor_resolve', 'workers', 'stability_check',
        'include_representatives', 'include_timing', 'pretty',
    )
    return {key: getattr(args, key) for key in keys if getattr(args, key) is not None}


def _error(message: str):
    print(f"エラー: {message}", file=sys.stderr)


def run(argv: Optional[List[str]] = None) -> int:
    """コマンドを実行して終了コードを返す"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
        force=True
    )

    try:
        workbench = Workbench.open(args.registry, WorkbenchConfig.create_default(), **_flags(args))
    except FileNotFoundError as e:
        _error(str(e))
        return EXIT_INVALID
    except (HomquotError, ValueError) as e:
        _error(str(e))
        return EXIT_INVALID

    with workbench:
        return _dispatch(args, workbench)


def _dispatch(args: argparse.Namespace, workbench: Workbench) -> int:
    config = workbench.config
    generator = ReportGenerator(pretty=config.pretty, include_timing=config.include_timing)

    if args.command == 'validate':
        report = workbench.validate()
        print(generator.render_validation(report, args.registry))
        return EXIT_INVALID if report.has_errors() else EXIT_OK

    try:
        if args.command == 'compute':
            report = workbench.compute(args.kind, args.a, args.b, args.n, args.cross_check, args.x_label)
        else:
            report = workbench.run_suite(args.name, args.x_label)
    except InvalidRegistryError as e:
        _error(str(e))
        print(generator.render_validation(e.report, args.registry), file=sys.stderr)
        return EXIT_INVALID
    except COMPUTATION_ERRORS as e:
        logging.getLogger(__name__).error("計算に失敗しました", exc_info=True)
        _error(str(e))
        return EXIT_FAILURE
    except (HomquotError, KeyError, ValueError) as e:
        _error(str(e))
        return EXIT_INVALID

    print(generator.render(report))
    for message in report.errors:
        _error(message)
    for agreement in report.failed_agreements:
        _error(
            f"{agreement.name} {agreement.query}: {agreement.left_route}={agreement.left_dim} / "
            f"{agreement.right_route}={agreement.right_dim}"
        )
    return EXIT_OK if report.ok else EXIT_FAILURE


def main():
    """メインエントリーポイント"""
    sys.exit(run())


if __name__ == "__main__":
    main()

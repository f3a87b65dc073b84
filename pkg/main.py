#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Weak TransNet
Запуск експериментів, перегляд каталогу задач, дослідження квадратур та параметра форми
"""

import sys
import time
import logging
import argparse
from pathlib import Path

from weak_transnet.harness import gamma_sweep, list_catalog, load_run_settings, quadrature_study, run
from weak_transnet.utils import WeakTransNetError, format_seconds, setup_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Weak TransNet - безсітковий розв\'язувач еліптичних рівнянь')
    parser.add_argument('--debug', action='store_true', help='Детальне логування')
    parser.add_argument('--settings', type=str, default=None,
                        help='Файл налаштувань (за замовчуванням: config.ini поруч з програмою)')
    subparsers = parser.add_subparsers(dest='command', required=True)

    run_parser = subparsers.add_parser('run', help='Виконати файл експериментів')
    run_parser.add_argument('config', type=str, help='INI-файл з секціями [experiment:<назва>]')
    run_parser.add_argument('--out', type=str, default=None, help='Каталог результатів')
    run_parser.add_argument('--seed', type=int, default=None, help='Одне головне зерно замість списку seeds')
    run_parser.add_argument('--jobs', type=int, default=None, help='Кількість паралельних процесів')
    run_parser.add_argument('--ref', type=str, default=None, help='Еталонна сітка CSV (x,y,u)')
    run_parser.add_argument('--docx', action='store_true', default=None, help='Створити звіт Word')

    subparsers.add_parser('list', help='Показати каталог задач')

    quad_parser = subparsers.add_parser('quadstudy', help='Порівняти квадратури Сімпсона та Монте-Карло')
    quad_parser.add_argument('config', type=str, nargs='?', default=None, help='INI-файл із секцією [quadstudy]')
    quad_parser.add_argument('--out', type=str, default=None, help='Каталог результатів')
    quad_parser.add_argument('--seed', type=int, default=None, help='Одне головне зерно')
    quad_parser.add_argument('--jobs', type=int, default=1, help='Кількість паралельних процесів')

    sweep_parser = subparsers.add_parser('sweep-gamma', help='Пошук оптимального параметра форми')
    sweep_parser.add_argument('--out', type=str, default=None, help='Каталог результатів')
    sweep_parser.add_argument('--seed', type=int, default=None, help='Одне головне зерно')
    sweep_parser.add_argument('--M', type=int, nargs='+', default=[200, 400], help='Розміри базису')
    sweep_parser.add_argument('--variant', choices=['bump', 'printed'], default='bump',
                              help='Варіант цільової функції')
    return parser


def main(argv=None):
    """Головна функція програми"""
    args = build_parser().parse_args(argv)

    setup_logging(logging.DEBUG if args.debug else logging.INFO)

    print("🧮 Weak TransNet")
    print("=" * 50)

    out_dir = getattr(args, 'out', None) or load_run_settings(args.settings)['out_dir']

    try:
        if args.command == 'list':
            print(list_catalog())
            return 0

        if args.command == 'run':
            print(f"📖 Файл експериментів: {args.config}")
            started = time.perf_counter()
            code = run(args.config, out_dir=out_dir, seed=args.seed, jobs=args.jobs, ref=args.ref,
                       settings_path=args.settings, docx=args.docx)
            print(f"⏱️  Час виконання: {format_seconds(time.perf_counter() - started)}")
            if code == 0:
                print(f"✅ Усі завдання виконано, результати у {Path(out_dir).absolute()}")
            elif code == 2:
                print("❌ Помилка конфігурації, обчислення не запускались")
            else:
                print("⚠️  Частина завдань завершилась помилкою, подробиці у журналі")
            return code

        if args.command == 'quadstudy':
            print("📊 Дослідження квадратур...")
            rows = quadrature_study(args.config, out_dir=out_dir, seed=args.seed, jobs=args.jobs)
            for row in rows:
                print(f"   {row['method']:<5} {row['n_points']:>6}  {row['rel_l2']:.3e}")
            print(f"✅ Таблиця записана у {Path(out_dir) / 'quadstudy.csv'}")
            return 0

        if args.command == 'sweep-gamma':
            print("🔍 Пошук оптимального параметра форми...")
            seeds = (args.seed,) if args.seed is not None else (0, 1, 2, 3, 4)
            rows = gamma_sweep(M_values=args.M, seeds=seeds, variant=args.variant, out_dir=out_dir)
            for row in rows:
                print(f"   σ_f={row['sigma_f']:<5g} M={row['M']:<5} γ*={row['gamma_opt']:g}")
            print(f"✅ Результати записані у {Path(out_dir) / 'gamma_sweep.csv'}")
            return 0

    except KeyboardInterrupt:
        print("\n⛔ Операцію перервано користувачем")
        return 130
    except WeakTransNetError as e:
        print(f"❌ Виникла помилка: {str(e)}")
        print("Для отримання детальної інформації запустіть з параметром --debug")
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())

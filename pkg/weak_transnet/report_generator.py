"""
Звіт прогону експериментів у форматі Word: медіани похибок, окремі завдання,
збої та короткі висновки по методах
"""

from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple
import logging

try:
    from docx import Document
    from docx.shared import Inches, Pt
    from docx.enum.text import WD_ALIGN_PARAGRAPH
    from docx.enum.table import WD_TABLE_ALIGNMENT
    from docx.oxml.shared import OxmlElement, qn
    DOCX_AVAILABLE = True
except ImportError:
    DOCX_AVAILABLE = False

logger = logging.getLogger(__name__)

METHOD_NAMES = {
    'WTN': 'Слабкий TransNet',
    'FWTN': "Слабкий TransNet з Фур'є-ознаками",
    'POU_WTN': 'Слабкий TransNet з розбиттям одиниці',
    'SF': 'Сильна форма (колокація)',
    'POU_SF': 'Сильна форма з розбиттям одиниці',
    'DRM': 'Метод Рітца',
    'FDRM': "Метод Рітца з Фур'є-ознаками",
}

# (стиль, розмір, жирний)
STYLES = (('Title', 17, True), ('Normal', 11, False), ('Heading 1', 14, True), ('Heading 2', 12, True))

HEADER_FILL = 'DDE4EE'


def _fmt(value) -> str:
    return 'н/д' if value is None else f'{value:.3e}'


def _method_name(method: str) -> str:
    return METHOD_NAMES.get(method, method)


class ReportGenerator:
    """Word-звіт про прогін набору експериментів"""

    def __init__(self, table_style: str = 'Table Grid', font: str = 'Times New Roman'):
        if not DOCX_AVAILABLE:
            raise ImportError("Для звіту потрібен пакет python-docx: pip install python-docx")

        self.table_style = table_style
        self.font = font
        self.document = None

    def generate_report(self, summary: Sequence[Dict[str, Any]], reports: Sequence[Any],
                        failures: Sequence[Tuple[str, str]], output_path: Path) -> bool:
        """
        Збирання та збереження звіту

        Args:
            summary: Рядки summarize() з медіанами по конфігураціях
            reports: ErrorReport успішних завдань
            failures: Пари (завдання, повідомлення) для завдань з помилкою
            output_path: Куди зберегти .docx

        Returns:
            False, якщо документ зібрати або зберегти не вдалося
        """
        logger.info(f"Формування Word-звіту: {len(reports)} завдань, {len(failures)} збоїв")
        try:
            self.document = Document()
            self._apply_styles()

            self._title_block(len(reports), len(failures))
            self._summary_table(summary)
            self._jobs_table(reports)
            self._failures_list(failures)
            self._method_findings(summary, failures)

            output_path = Path(output_path)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            self.document.save(str(output_path))
        except Exception as e:
            logger.error(f"Word-звіт не сформовано: {e}")
            return False

        logger.info(f"Word-звіт збережено: {output_path}")
        return True

    def _apply_styles(self):
        for name, size, bold in STYLES:
            font = self.document.styles[name].font
            font.name = self.font
            font.size = Pt(size)
            font.bold = bold

    def _centered(self, label: str, value: str):
        paragraph = self.document.add_paragraph()
        paragraph.alignment = WD_ALIGN_PARAGRAPH.CENTER
        paragraph.add_run(label).bold = True
        paragraph.add_run(value)
        return paragraph

    def _title_block(self, n_jobs: int, n_failed: int):
        heading = self.document.add_heading('Weak TransNet: результати прогону', 0)
        heading.alignment = WD_ALIGN_PARAGRAPH.CENTER

        self._centered('Успішних завдань: ', str(n_jobs))
        if n_failed:
            self._centered('Завдань з помилкою: ', str(n_failed))
        self._centered('Сформовано: ', datetime.now().strftime('%Y-%m-%d %H:%M'))

    def _table(self, headers: List[str], rows: List[List[str]], first_width: float = None):
        table = self.document.add_table(rows=1, cols=len(headers))
        table.style = self.table_style
        table.alignment = WD_TABLE_ALIGNMENT.CENTER

        for cell, text in zip(table.rows[0].cells, headers):
            cell.paragraphs[0].add_run(text).bold = True
            self._shade(cell)
        for values in rows:
            for cell, text in zip(table.add_row().cells, values):
                cell.text = text

        if first_width is not None:
            for cell in table.columns[0].cells:
                cell.width = Inches(first_width)
        return table

    @staticmethod
    def _shade(cell):
        # заливка заголовка лише косметична, її відсутність звіт не ламає
        try:
            fill = OxmlElement(qn('w:shd'))
            fill.set(qn('w:val'), 'clear')
            fill.set(qn('w:fill'), HEADER_FILL)
            cell._tc.get_or_add_tcPr().append(fill)
        except Exception as e:
            logger.debug(f"Заливку клітинки пропущено: {e}")

    def _summary_table(self, summary: Sequence[Dict[str, Any]]):
        """Медіана rel-L2 по зернах для кожної конфігурації"""
        self.document.add_heading('Медіанні похибки', level=1)
        if not summary:
            self.document.add_paragraph('Успішних завдань немає.')
            return

        rows = [[row['configuration'], row['method'], row['problem'],
                 'розбиття' if row['M'] is None else str(row['M']), str(row['N']),
                 str(row['seeds']), _fmt(row['median_rel_l2'])]
                for row in summary]
        self._table(['Конфігурація', 'Метод', 'Задача', 'M', 'N', 'Зерен', 'Медіана rel-L2'], rows)

    def _jobs_table(self, reports: Sequence[Any]):
        self.document.add_heading('Окремі завдання', level=1)
        if not reports:
            self.document.add_paragraph('Немає даних.')
            return

        rows = [[report.experiment, str(report.seed), _fmt(report.rel_l2),
                 _fmt(report.diagnostics.get('residual_norm')), str(report.diagnostics.get('rank', 'н/д')),
                 f'{report.wall_time_ms:.0f}']
                for report in reports]
        self._table(['Завдання', 'Зерно', 'rel-L2', "Нев'язка", 'Ранг', 'Час, мс'], rows, first_width=2.2)

    def _failures_list(self, failures: Sequence[Tuple[str, str]]):
        if not failures:
            return

        self.document.add_heading('Збої', level=1)
        for name, message in failures:
            paragraph = self.document.add_paragraph(style='List Number')
            paragraph.add_run(f'{name}: ').bold = True
            paragraph.add_run(message)

    def _method_findings(self, summary: Sequence[Dict[str, Any]], failures: Sequence[Tuple[str, str]]):
        """Найкраща медіана по кожному методу та загальний переможець"""
        self.document.add_heading('Висновки', level=1)

        scored = [row for row in summary if row['median_rel_l2'] is not None]
        best_by_method: Dict[str, Dict[str, Any]] = {}
        for row in scored:
            current = best_by_method.get(row['method'])
            if current is None or row['median_rel_l2'] < current['median_rel_l2']:
                best_by_method[row['method']] = row

        lines = []
        if best_by_method:
            winner = min(best_by_method.values(), key=lambda row: row['median_rel_l2'])
            lines.append(f"✅ Найточніше: {_method_name(winner['method'])}, {winner['configuration']} "
                         f"(медіана {_fmt(winner['median_rel_l2'])}).")
            for method in sorted(best_by_method):
                row = best_by_method[method]
                lines.append(f"📊 {_method_name(method)}: {_fmt(row['median_rel_l2'])} ({row['configuration']}).")
        missing = len(summary) - len(scored)
        if missing:
            lines.append(f'⚠️ Без еталону, похибку не обчислено: {missing} конфігурацій.')
        if failures:
            lines.append(f'🔴 Завершились помилкою: {len(failures)} завдань.')

        for line in lines:
            self.document.add_paragraph(line, style='List Bullet')

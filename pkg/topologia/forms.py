"""
Formularios de validación de formato para archivos de escenario

Este archivo contiene los formularios que revisan cada bloque del JSON
antes de construir los tipos de red:
- Formulario de enlace
- Formulario de flujo
- Formulario de hiper-enlace declarado
- Formulario de parámetros de corrida
"""

from django import forms
from django.core.exceptions import ValidationError


class EnlaceForm(forms.Form):
    """
    Enlace {from, to, cost}. El signo del costo no se revisa aquí:
    un costo negativo es una violación estructural, no de formato.
    """
    origen = forms.CharField(max_length=100)
    destino = forms.CharField(max_length=100)
    costo = forms.FloatField()


class FlujoForm(forms.Form):
    """
    Flujo {id, src, dst, load}; los caminos se revisan aparte porque
    son listas anidadas.
    """
    id = forms.IntegerField()
    origen = forms.CharField(max_length=100)
    destino = forms.CharField(max_length=100)
    carga = forms.FloatField()


class HiperEnlaceForm(forms.Form):
    nodo = forms.CharField(max_length=100)
    flujo_a = forms.IntegerField()
    camino_a = forms.IntegerField(min_value=1)
    flujo_b = forms.IntegerField()
    camino_b = forms.IntegerField(min_value=1)


class ParametrosForm(forms.Form):
    """
    Bloque `params` del escenario. Todos los campos son opcionales;
    los ausentes toman el valor de los ajustes.
    """
    r = forms.FloatField(required=False)
    kappa = forms.FloatField(required=False)
    eta = forms.FloatField(required=False)
    step = forms.FloatField(required=False)
    n_small = forms.IntegerField(required=False)
    n_large = forms.IntegerField(required=False)

    def clean_r(self):
        """
        El exponente de la media debe ser negativo
        """
        r = self.cleaned_data.get('r')
        if r is not None and not r < 0:
            raise ValidationError('El exponente r debe ser negativo.')
        return r

    def _positivo(self, campo):
        valor = self.cleaned_data.get(campo)
        if valor is not None and not valor > 0:
            raise ValidationError(f'El parámetro {campo} debe ser positivo.')
        return valor

    def clean_kappa(self):
        return self._positivo('kappa')

    def clean_eta(self):
        return self._positivo('eta')

    def clean_step(self):
        return self._positivo('step')

    def clean_n_small(self):
        return self._positivo('n_small')

    def clean_n_large(self):
        return self._positivo('n_large')


def primer_error(form) -> str:
    """Primer mensaje de error de un formulario, con el nombre del campo."""
    for campo, errores in form.errors.items():
        return f'{campo}: {errores[0]}'
    return 'formato inválido'

package corpus;

public class Shapes {
    public abstract static class Shape {
        abstract double area();

        double perimeter() {
            return 0;
        }

        String describe() {
            return getClass().getName() + " area=" + area();
        }
    }

    public static class Circle extends Shape {
        final double r;

        Circle(double r) {
            this.r = r;
        }

        double area() {
            return Math.PI * r * r;
        }

        double perimeter() {
            return 2 * Math.PI * r;
        }
    }

    public static class Rect extends Shape {
        final double w, h;

        Rect(double w, double h) {
            this.w = w;
            this.h = h;
        }

        double area() {
            return w * h;
        }

        double perimeter() {
            return 2 * (w + h);
        }
    }

    public static class Square extends Rect {
        Square(double s) {
            super(s, s);
        }
    }

    public static double totalArea(Shape[] shapes) {
        double t = 0;
        for (int i = 0; i < shapes.length; i++) {
            if (shapes[i] != null) {
                t += shapes[i].area();
            }
        }
        return t;
    }

    public static int countSquares(Object[] things) {
        int n = 0;
        for (int i = 0; i < things.length; i++) {
            if (things[i] instanceof Square) {
                n++;
            } else if (things[i] instanceof Rect) {
                Rect r = (Rect) things[i];
                if (r.w == r.h) {
                    n++;
                }
            }
        }
        return n;
    }
}

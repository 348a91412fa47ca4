public class Run09 {
    public static void main(String[] args) {
        int a = 12;
        int b = a * 6;
        int c = a + b;
        System.out.println(c);
    }
}
